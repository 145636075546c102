"""Strict INI run configuration for the command-line interface.

Unknown sections and keys are rejected so that every run is auditable from
its config file alone. Relative paths resolve against the config file's
directory.
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from .dataset import DEM_CANDIDATE, REP_CANDIDATE, SyntheticSpec
from .errors import FormatError, InputError
from .trainer import MODEL_KINDS, FitConfig


@dataclass(frozen=True)
class SplitSpec:
    mode: str = "precinct"
    train_frac: float = 0.7
    seed: int = 0


@dataclass(frozen=True)
class EvalSpec:
    landslide: bool = True
    landslide_threshold: float = 0.9
    primary: bool = True
    # which side weak-label reports are computed on: test | train | all
    on: str = "test"


@dataclass(frozen=True)
class DataSpec:
    results: Optional[Path] = None
    voters: Optional[Path] = None
    feature_spec: Optional[Path] = None
    dem_candidate: str = DEM_CANDIDATE
    rep_candidate: str = REP_CANDIDATE


@dataclass(frozen=True)
class RunConfig:
    data: DataSpec = field(default_factory=DataSpec)
    model_kind: str = "logistic"
    fit: FitConfig = field(default_factory=FitConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    evaluate: EvalSpec = field(default_factory=EvalSpec)
    synthetic: Optional[SyntheticSpec] = None
    synthetic_seed: int = 0
    out_dir: Path = Path("out")

    @property
    def uses_synthetic(self) -> bool:
        return self.synthetic is not None and self.data.results is None

    def with_seed(self, seed: int) -> "RunConfig":
        """Override every seed (fit, split and synthetic) with one value."""
        return replace(self, fit=replace(self.fit, seed=seed),
                       split=replace(self.split, seed=seed), synthetic_seed=seed)

    def to_json(self) -> dict:
        def conv(obj):
            if isinstance(obj, Path):
                return str(obj)
            if isinstance(obj, dict):
                return {k: conv(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [conv(v) for v in obj]
            return obj
        return conv(asdict(self))

    def data_json(self) -> dict:
        full = self.to_json()
        return {"data": full["data"], "synthetic": full["synthetic"],
                "synthetic_seed": full["synthetic_seed"] if self.uses_synthetic else None}

    def digest(self) -> str:
        # the output location does not affect results, so it is left out
        full = self.to_json()
        full.pop("out_dir")
        return _digest(full)

    def data_digest(self) -> str:
        return _digest(self.data_json())


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _coerce(section: str, key: str, raw: str, typ):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ == "optional_int":
            return None if raw.lower() in ("", "none") else int(raw)
        return raw
    except ValueError:
        raise FormatError(f"[{section}] {key}: cannot parse {raw!r}") from None


_FIT_TYPES = {
    "learning_rate": float, "anneal_exponent": float, "epochs": int, "clip_norm": float,
    "skip_norm": float, "l2_lambda": float, "hidden_size": int, "seed": int,
    "track_exact_loss": bool, "exact_subsample": "optional_int", "update_mode": str,
}
_SPLIT_TYPES = {"mode": str, "train_frac": float, "seed": int}
_EVAL_TYPES = {"landslide": bool, "landslide_threshold": float, "primary": bool, "on": str}
_DATA_KEYS = {"results", "voters", "feature_spec", "dem_candidate", "rep_candidate"}
_SYNTH_TYPES = {
    "n_precincts": int, "voters_per_precinct": str, "n_features": int, "model": str,
    "theta": str, "hidden_size": int, "neural_scale": float,
    "precinct_correlation": float, "n_counties": int, "primary_rate": float, "seed": int,
}
_SECTIONS = {"data", "model", "fit", "split", "evaluate", "synthetic", "output"}


def _section_values(cp, section: str, types: dict) -> dict:
    if not cp.has_section(section):
        return {}
    sec = cp[section]
    unknown = set(sec) - set(types)
    if unknown:
        raise FormatError(f"[{section}]: unknown key(s) {sorted(unknown)}")
    return {k: _coerce(section, k, sec[k], types[k]) for k in sec}


def parse_synthetic(values: dict) -> tuple[SyntheticSpec, int]:
    values = dict(values)
    seed = values.pop("seed", 0)
    try:
        if "voters_per_precinct" in values:
            parts = [int(v) for v in
                     str(values["voters_per_precinct"]).replace("-", ",").split(",") if v.strip()]
            values["voters_per_precinct"] = parts[0] if len(parts) == 1 else (parts[0], parts[1])
        if "theta" in values:
            txt = str(values["theta"]).strip()
            values["theta"] = None if txt.lower() in ("", "none", "random") else \
                tuple(float(v) for v in txt.split(","))
        return SyntheticSpec(**values), seed
    except (TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"[synthetic]: {exc}") from None


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    unknown = set(cp.sections()) - _SECTIONS
    if unknown:
        raise FormatError(f"{path}: unknown section(s) {sorted(unknown)}")
    base = path.parent.resolve()

    data_kwargs = {}
    if cp.has_section("data"):
        sec = cp["data"]
        bad = set(sec) - _DATA_KEYS
        if bad:
            raise FormatError(f"[data]: unknown key(s) {sorted(bad)}")
        for key in ("results", "voters", "feature_spec"):
            if key in sec:
                p = base / sec[key].strip()
                if not p.is_file():
                    raise InputError(f"[data] {key}: file not found: {p}")
                data_kwargs[key] = p
        for key in ("dem_candidate", "rep_candidate"):
            if key in sec:
                data_kwargs[key] = sec[key].strip()
    data = DataSpec(**data_kwargs)

    model = _section_values(cp, "model", {"kind": str})
    kind = model.get("kind", "logistic")
    if kind not in MODEL_KINDS:
        raise FormatError(f"[model] kind must be one of {MODEL_KINDS}")

    try:
        fit = FitConfig(**_section_values(cp, "fit", _FIT_TYPES))
        split = SplitSpec(**_section_values(cp, "split", _SPLIT_TYPES))
        evaluate = EvalSpec(**_section_values(cp, "evaluate", _EVAL_TYPES))
    except TypeError as exc:
        raise FormatError(str(exc)) from None
    if split.mode not in ("precinct", "county"):
        raise FormatError("[split] mode must be precinct or county")
    if evaluate.on not in ("test", "train", "all"):
        raise FormatError("[evaluate] on must be test, train or all")

    synthetic, synthetic_seed = None, 0
    if cp.has_section("synthetic"):
        synthetic, synthetic_seed = parse_synthetic(_section_values(cp, "synthetic", _SYNTH_TYPES))

    if data.results is None and synthetic is None:
        raise InputError(f"{path}: need [data] results/voters/feature_spec or a [synthetic] section")
    if data.results is not None and (data.voters is None or data.feature_spec is None):
        raise InputError("[data] needs results, voters and feature_spec together")

    out = _section_values(cp, "output", {"dir": str})
    out_dir = base / out.get("dir", "out")
    return RunConfig(data=data, model_kind=kind, fit=fit, split=split, evaluate=evaluate,
                     synthetic=synthetic, synthetic_seed=synthetic_seed, out_dir=out_dir)


def load_synthetic_spec(path) -> tuple[SyntheticSpec, int]:
    """Read a standalone ``[synthetic]`` INI file; returns the generator settings and seed."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"synthetic spec not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if cp.sections() != ["synthetic"]:
        raise FormatError(f"{path}: expected exactly one [synthetic] section")
    return parse_synthetic(_section_values(cp, "synthetic", _SYNTH_TYPES))
