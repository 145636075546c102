"""On-disk artifacts: cached datasets (npz) and parameter files (JSON)."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataset import Dataset, Precinct
from .errors import InputError
from .glm import ModelParams, ShapeError, params_from_dict


def save_dataset(dataset: Dataset, path, digest: str = "") -> None:
    X, _ = dataset.stacked
    ps = dataset.precincts
    tags = [p.tags if p.tags is not None else np.zeros(p.n_voters, dtype=np.int8) for p in ps]
    ids = [vid for p in ps for vid in (p.voter_ids or tuple(str(i) for i in range(p.n_voters)))]
    np.savez_compressed(
        path,
        X=X,
        sizes=np.array([p.n_voters for p in ps], dtype=np.int64),
        D=np.array([p.D for p in ps], dtype=np.int64),
        T=np.array([p.T for p in ps], dtype=np.int64),
        county=np.array([p.county for p in ps], dtype=str),
        name=np.array([p.name for p in ps], dtype=str),
        voter_ids=np.array(ids, dtype=str),
        tags=np.concatenate(tags) if tags else np.empty(0, dtype=np.int8),
        meta=np.array(json.dumps({
            "feature_names": list(dataset.feature_names),
            "scaling": dataset.scaling,
            "report": dataset.report,
            "digest": digest,
        })),
    )


def load_dataset(path) -> tuple[Dataset, str]:
    """Return the cached dataset and the data digest it was built from."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"dataset cache not found: {path}")
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        X, sizes, tags, ids = z["X"], z["sizes"], z["tags"], z["voter_ids"].tolist()
        bounds = np.concatenate([[0], np.cumsum(sizes)])
        precincts = tuple(
            Precinct(county=str(c), name=str(n), X=X[a:b], D=int(d), T=int(t),
                     voter_ids=tuple(ids[a:b]), tags=tags[a:b])
            for c, n, d, t, a, b in zip(z["county"], z["name"], z["D"], z["T"],
                                        bounds[:-1], bounds[1:]))
    ds = Dataset(precincts, tuple(meta["feature_names"]), meta["scaling"], meta["report"])
    return ds, meta.get("digest", "")


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def save_params(params: ModelParams, path, **extra) -> None:
    dump_json({**params.to_dict(), **extra}, path)


def load_params(path) -> ModelParams:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"params file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
        return params_from_dict(obj)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ShapeError):
            raise
        raise InputError(f"{path}: malformed params file ({exc})") from None
