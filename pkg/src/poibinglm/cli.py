"""Command-line entry point.

Subcommands: ingest, fit, evaluate, predict, simulate, poibin. Exit codes are
0 on success, 1 for numeric/training failures and 2 for input or config errors.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import poibin
from .artifacts import dump_json, load_dataset, load_params, save_dataset, save_params
from .config import RunConfig, load_run_config, load_synthetic_spec
from .dataset import (TAG_DEM, TAG_REP, Dataset, binarize_and_join, generate_synthetic,
                      load_feature_spec, load_precinct_results, load_voter_file, split)
from .errors import (CapacityError, DegenerateDistributionError, DomainError, InputError,
                     NumericError, ShapeError)
from .evaluation import (UndefinedVarianceError, export_predictions, landslide_report,
                         precinct_predictions, primary_voter_report, r2_weighted)
from .trainer import dataset_loss, fit

logger = logging.getLogger("poibinglm")

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
DATASET_CACHE = "dataset.npz"


# ---------------------------------------------------------------------------
# helpers


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}") from None
    return out


def build_dataset(config: RunConfig) -> Dataset:
    if config.uses_synthetic:
        ds, _ = generate_synthetic(config.synthetic, seed=config.synthetic_seed)
        return ds
    data = config.data
    results = load_precinct_results(data.results, data.dem_candidate, data.rep_candidate)
    spec = load_feature_spec(data.feature_spec)
    voters = load_voter_file(data.voters, spec)
    return binarize_and_join(results, voters)


def obtain_dataset(config: RunConfig) -> Dataset:
    """Use the cached dataset when it was built from the same data config."""
    cache = Path(config.out_dir) / DATASET_CACHE
    if cache.is_file():
        ds, digest = load_dataset(cache)
        if digest == config.data_digest():
            return ds
        logger.info("dataset cache %s is stale; rebuilding", cache)
    return build_dataset(config)


def _split(config: RunConfig, ds: Dataset) -> tuple[Dataset, Dataset]:
    s = config.split
    return split(ds, s.mode, s.train_frac, s.seed)


def _r2(ds: Dataset, params):
    try:
        return r2_weighted(precinct_predictions(ds, params))
    except (UndefinedVarianceError, InputError):
        return None


def _tsv(path: Path, header: list[str], rows, digest: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_digest={digest}\n")
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join("" if v is None else (f"{v:.12g}" if isinstance(v, float) else str(v))
                               for v in row) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(config: RunConfig) -> dict:
    out = _out_dir(config)
    ds = build_dataset(config)
    digest = config.data_digest()
    save_dataset(ds, out / DATASET_CACHE, digest)
    report = {"config_digest": config.digest(), "data_digest": digest,
              "feature_names": list(ds.feature_names), "scaling": ds.scaling, **ds.report}
    report.setdefault("precincts_retained", len(ds))
    dump_json(report, out / "ingest_report.json")
    return report


def cmd_fit(config: RunConfig):
    out = _out_dir(config)
    ds = obtain_dataset(config)
    train, test = _split(config, ds)
    digest = config.digest()
    r2_rows = []

    def track(epoch, params):
        r2_rows.append((epoch, _r2(train, params), _r2(test, params)))

    report = fit(train, config.model_kind, config.fit, callback=track)
    save_params(report.params, out / "params.json", config_digest=digest)
    dump_json({"config_digest": digest, **report.to_json()}, out / "fit_report.json")
    exact = report.exact_nll or [None] * report.epochs_run
    _tsv(out / "loss.tsv", ["epoch", "approx_nll", "exact_nll"],
         [(e + 1, a, x) for e, (a, x) in enumerate(zip(report.approx_nll, exact))], digest)
    _tsv(out / "r2.tsv", ["epoch", "train_r2", "test_r2"], r2_rows, digest)
    dump_json({"config_digest": digest,
               "train": [list(p.key) for p in train], "test": [list(p.key) for p in test]},
              out / "split.json")
    return report


def cmd_evaluate(config: RunConfig, params_path) -> dict:
    out = _out_dir(config)
    params = load_params(params_path)
    ds = obtain_dataset(config)
    if params.n_features != ds.n_features:
        raise ShapeError(
            f"params expect {params.n_features} covariates, dataset has {ds.n_features}")
    train, test = _split(config, ds)
    digest = config.digest()
    result = {
        "config_digest": digest,
        "params_file": str(params_path),
        "train": {"r2": _r2(train, params), "approx_nll": dataset_loss(train, params),
                  "precincts": len(train)},
        "test": {"r2": _r2(test, params), "approx_nll": dataset_loss(test, params),
                 "precincts": len(test)},
    }
    ev = config.evaluate
    side = {"test": test, "train": train, "all": ds}[ev.on]
    result["weak_label_side"] = ev.on
    if ev.landslide:
        rep = landslide_report(side, params, ev.landslide_threshold)
        result["landslide"] = {"threshold": ev.landslide_threshold, **rep.to_json()}
        (out / "landslide_hist.tsv").write_text(f"# config_digest={digest}\n" + rep.to_tsv())
    if ev.primary:
        rep = primary_voter_report(side, params)
        result["primary"] = rep.to_json()
        (out / "primary_hist.tsv").write_text(f"# config_digest={digest}\n" + rep.to_tsv())
    dump_json(result, out / "evaluation.json")
    return result


def cmd_predict(config: RunConfig, params_path, which: str = "all", output=None) -> int:
    out = _out_dir(config)
    params = load_params(params_path)
    ds = obtain_dataset(config)
    if params.n_features != ds.n_features:
        raise ShapeError(
            f"params expect {params.n_features} covariates, dataset has {ds.n_features}")
    if which != "all":
        train, test = _split(config, ds)
        ds = train if which == "train" else test
    return export_predictions(ds, params, output or out / "predictions.csv")


def cmd_simulate(config: RunConfig | None, spec_path=None, out_dir=None, seed=None) -> Path:
    """Write a simulated election as raw CSV inputs plus a ready-to-run config."""
    if spec_path is not None:
        spec, spec_seed = load_synthetic_spec(spec_path)
    elif config is not None and config.synthetic is not None:
        spec, spec_seed = config.synthetic, config.synthetic_seed
    else:
        raise InputError("simulate needs a [synthetic] section or --spec file")
    seed = spec_seed if seed is None else seed
    out = Path(out_dir) if out_dir is not None else (
        Path(config.out_dir) if config is not None else Path("out"))
    out.mkdir(parents=True, exist_ok=True)
    ds, truth = generate_synthetic(spec, seed=seed)
    names = list(ds.feature_names)
    with open(out / "results.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["county", "precinct", "candidate", "votes"])
        for p in ds:
            w.writerow([p.county, p.name, "HILLARY CLINTON", p.D])
            w.writerow([p.county, p.name, "DONALD TRUMP", p.T - p.D])
    tag_text = {TAG_DEM: "D", TAG_REP: "R"}
    with open(out / "voters.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["county", "precinct", "voter_id", *names, "primary"])
        for p in ds:
            for i, vid in enumerate(p.voter_ids):
                w.writerow([p.county, p.name, vid, *(repr(float(v)) for v in p.X[i]),
                            tag_text.get(int(p.tags[i]), "")])
    feat = configparser.ConfigParser(interpolation=None)
    for n in names:
        feat[f"feature:{n}"] = {"kind": "numeric", "column": n}
    feat["tags"] = {"column": "primary", "dem_values": "D", "rep_values": "R"}
    with open(out / "features.ini", "w", encoding="utf-8") as fh:
        feat.write(fh)
    run = configparser.ConfigParser(interpolation=None)
    run["data"] = {"results": "results.csv", "voters": "voters.csv", "feature_spec": "features.ini"}
    run["model"] = {"kind": "logistic" if spec.model == "logistic" else "neural"}
    run["output"] = {"dir": "run"}
    with open(out / "run.ini", "w", encoding="utf-8") as fh:
        run.write(fh)
    save_params(truth, out / "true_params.json", synthetic_seed=seed)
    return out


def parse_probs(text: str | None, file: str | None) -> np.ndarray:
    if file is not None:
        path = Path(file)
        if not path.is_file():
            raise InputError(f"probability file not found: {path}")
        text = path.read_text(encoding="utf-8")
    if text is None:
        raise InputError("give probabilities with --p or --file")
    tokens = [t for t in text.replace(",", " ").split() if t]
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise InputError(f"malformed probability list: {text.strip()[:80]!r}") from None
    return poibin.as_probs(values)


def cmd_poibin(p, k: int | None = None, what: str = "all") -> list[tuple[str, float]]:
    p = poibin.as_probs(p)
    wanted = {"pmf", "cdf", "moments", "lyapunov", "loglik"} if what == "all" else \
        {w.strip() for w in what.split(",") if w.strip()}
    unknown = wanted - {"pmf", "cdf", "moments", "lyapunov", "loglik"}
    if unknown:
        raise InputError(f"unknown quantities {sorted(unknown)}")
    needs_k = wanted & {"pmf", "cdf", "loglik"}
    if needs_k and k is None:
        if what != "all":
            raise InputError(f"{sorted(needs_k)} need --k")
        wanted -= needs_k
    lines: list[tuple[str, float]] = [("n", p.size)]
    mom = poibin.moments(p)
    if "moments" in wanted:
        lines += [("mean", mom.mean), ("variance", mom.variance)]
    if "pmf" in wanted:
        lines.append((f"pmf[{k}]", poibin.pmf_dft(p, k)))
    if "cdf" in wanted:
        lines.append((f"cdf[{k}]", poibin.cdf_dft(p, k)))
    if "loglik" in wanted:
        lines.append((f"loglik_exact[{k}]", poibin.loglik_exact(p, k)))
        if mom.variance > 0:
            lines.append((f"loglik_normal[{k}]", poibin.loglik_normal(p, k)))
    if "lyapunov" in wanted and mom.variance > 0:
        lines.append(("lyapunov_ratio", poibin.lyapunov_ratio(p)))
    return lines


# ---------------------------------------------------------------------------
# argument parsing


def _global_flags(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--config", default=default, help="run config INI file")
    parser.add_argument("--seed", type=int, default=default,
                        help="override every seed in the config")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poibinglm",
        description="Fit individual-level models from aggregate counts with Poisson binomial GLMs.")
    _global_flags(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)

    sub.add_parser("ingest", parents=[common], help="load, join and cache the dataset")
    sub.add_parser("fit", parents=[common], help="split and train; write params and reports")
    ev = sub.add_parser("evaluate", parents=[common], help="R^2, losses and weak-label reports")
    ev.add_argument("--params", help="params JSON (default: <out>/params.json)")
    pr = sub.add_parser("predict", parents=[common], help="export per-voter probabilities")
    pr.add_argument("--params", help="params JSON (default: <out>/params.json)")
    pr.add_argument("--which", choices=["all", "train", "test"], default="all")
    pr.add_argument("--output", help="CSV path (default: <out>/predictions.csv)")
    sim = sub.add_parser("simulate", parents=[common], help="write a synthetic election")
    sim.add_argument("--spec", help="INI file with a [synthetic] section")
    pb = sub.add_parser("poibin", parents=[common], help="Poisson binomial utilities")
    pb.add_argument("--p", help="comma or space separated probabilities")
    pb.add_argument("--file", help="file of probabilities")
    pb.add_argument("--k", type=int, help="count at which to evaluate pmf/cdf/loglik")
    pb.add_argument("--what", default="all",
                    help="comma list of pmf,cdf,moments,lyapunov,loglik (default all)")
    return parser


def _load_config(args) -> RunConfig:
    if args.config is None:
        raise InputError(f"{args.command} requires --config")
    config = load_run_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.out is not None:
        config = replace(config, out_dir=Path(args.out))
    return config


def run(args) -> int:
    cmd = args.command
    if cmd == "poibin":
        for name, value in cmd_poibin(parse_probs(args.p, args.file), args.k, args.what):
            print(f"{name}\t{value:.12g}" if isinstance(value, float) else f"{name}\t{value}")
        return EXIT_OK
    if cmd == "simulate":
        config = _load_config(args) if args.config else None
        out = cmd_simulate(config, args.spec, args.out, args.seed)
        print(f"wrote synthetic election to {out}")
        return EXIT_OK
    config = _load_config(args)
    out = Path(config.out_dir)
    if cmd == "ingest":
        report = cmd_ingest(config)
        print(f"ingested {report['precincts_retained']} precincts; "
              f"report at {out / 'ingest_report.json'}")
    elif cmd == "fit":
        report = cmd_fit(config)
        print(f"fit {report.epochs_run} epochs; final approx NLL "
              f"{report.approx_nll[-1] if report.approx_nll else float('nan'):.6f}")
    elif cmd == "evaluate":
        result = cmd_evaluate(config, args.params or out / "params.json")
        print(f"train R2 {result['train']['r2']}; test R2 {result['test']['r2']}")
    elif cmd == "predict":
        n = cmd_predict(config, args.params or out / "params.json", args.which, args.output)
        print(f"wrote {n} predictions")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (NumericError, DegenerateDistributionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, DomainError, CapacityError, ShapeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
