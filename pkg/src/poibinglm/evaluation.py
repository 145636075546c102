"""Precinct-level fit metrics, weak-label reports and per-voter prediction export."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import TAG_DEM, TAG_REP, Dataset
from .errors import InputError, PoibinGLMError
from .glm import ModelParams

HIST_BIN_WIDTH = 0.05
HIST_EDGES = np.linspace(0.0, 1.0, 21)


class UndefinedVarianceError(PoibinGLMError, ArithmeticError):
    """Weighted R^2 is undefined when every actual share is identical."""


@dataclass(frozen=True)
class PrecinctPrediction:
    key: tuple[str, str]
    predicted_share: float
    actual_share: float
    weight: float


def precinct_predictions(dataset: Dataset, params: ModelParams) -> list[PrecinctPrediction]:
    """Expected vote share (mean voter probability) against the observed D/T."""
    probs = dataset.voter_probs(params)
    _, offsets = dataset.stacked
    out = []
    for k, pr in enumerate(dataset.precincts):
        if pr.T < 1 or pr.n_voters == 0:
            continue
        p = probs[offsets[k]:offsets[k] + pr.n_voters]
        out.append(PrecinctPrediction(pr.key, float(p.mean()), pr.D / pr.T, float(pr.T)))
    return out


def r2_weighted(preds: Sequence[PrecinctPrediction]) -> float:
    """Vote-weighted R^2 of predicted against actual precinct shares; can be negative."""
    if not preds:
        raise InputError("r2_weighted needs at least one precinct")
    a = np.array([p.actual_share for p in preds])
    yhat = np.array([p.predicted_share for p in preds])
    w = np.array([p.weight for p in preds], dtype=float)
    abar = np.dot(w, a) / w.sum()
    ss_tot = np.dot(w, (a - abar) ** 2)
    if not ss_tot > 0.0:
        raise UndefinedVarianceError("all actual shares are identical")
    return float(1.0 - np.dot(w, (a - yhat) ** 2) / ss_tot)


@dataclass
class WeakLabelReport:
    group_means: dict[str, float | None]
    histograms: dict[str, list[int]]
    group_sizes: dict[str, int]
    overall_mean: float | None = None
    empty_groups: list[str] = field(default_factory=list)
    bin_edges: list[float] = field(default_factory=lambda: HIST_EDGES.tolist())

    def to_json(self) -> dict:
        return {
            "group_means": self.group_means,
            "histograms": self.histograms,
            "group_sizes": self.group_sizes,
            "overall_mean": self.overall_mean,
            "empty_groups": self.empty_groups,
            "bin_edges": self.bin_edges,
        }

    def to_tsv(self) -> str:
        groups = list(self.histograms)
        lines = ["\t".join(["bin_lo", "bin_hi", *groups])]
        for b in range(len(self.bin_edges) - 1):
            row = [f"{self.bin_edges[b]:.2f}", f"{self.bin_edges[b + 1]:.2f}"]
            row += [str(self.histograms[g][b]) for g in groups]
            lines.append("\t".join(row))
        return "\n".join(lines) + "\n"


def _report(groups: dict[str, np.ndarray], everyone: np.ndarray) -> WeakLabelReport:
    means, hists, sizes, empty = {}, {}, {}, []
    for name, probs in groups.items():
        sizes[name] = int(probs.size)
        hists[name] = np.histogram(probs, bins=HIST_EDGES)[0].astype(int).tolist()
        if probs.size:
            means[name] = float(probs.mean())
        else:
            means[name] = None
            empty.append(name)
    overall = float(everyone.mean()) if everyone.size else None
    return WeakLabelReport(means, hists, sizes, overall, empty)


def landslide_report(dataset: Dataset, params: ModelParams, threshold: float = 0.9) -> WeakLabelReport:
    """Predicted probabilities of voters in lopsided precincts.

    ``dem_landslide`` holds precincts with D/T >= threshold, ``rep_landslide``
    those with D/T <= 1 - threshold.
    """
    if not 0.5 < threshold <= 1.0:
        raise InputError("landslide threshold must lie in (0.5, 1]")
    probs = dataset.voter_probs(params)
    _, offsets = dataset.stacked
    dem, rep = [], []
    for k, pr in enumerate(dataset.precincts):
        if pr.T < 1:
            continue
        seg = probs[offsets[k]:offsets[k] + pr.n_voters]
        if pr.D / pr.T >= threshold:
            dem.append(seg)
        elif pr.D / pr.T <= 1.0 - threshold:
            rep.append(seg)
    cat = lambda parts: np.concatenate(parts) if parts else np.empty(0)  # noqa: E731
    return _report({"dem_landslide": cat(dem), "rep_landslide": cat(rep)}, probs)


def primary_voter_report(dataset: Dataset, params: ModelParams) -> WeakLabelReport:
    """Predicted probabilities grouped by primary participation tag."""
    probs = dataset.voter_probs(params)
    tags = np.concatenate([
        pr.tags if pr.tags is not None else np.zeros(pr.n_voters, dtype=np.int8)
        for pr in dataset.precincts
    ]) if len(dataset) else np.empty(0, dtype=np.int8)
    return _report({"dem_primary": probs[tags == TAG_DEM],
                    "rep_primary": probs[tags == TAG_REP]}, probs)


def export_predictions(dataset: Dataset, params: ModelParams, path) -> int:
    """Write ``county,precinct,voter_id,probability`` rows; returns the row count."""
    path = Path(path)
    probs = dataset.voter_probs(params)
    rows = 0
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["county", "precinct", "voter_id", "probability"])
            for pr in dataset.precincts:
                ids = pr.voter_ids or tuple(str(i) for i in range(pr.n_voters))
                for vid in ids:
                    writer.writerow([pr.county, pr.name, vid, f"{probs[rows]:.6f}"])
                    rows += 1
    except OSError as exc:
        raise InputError(f"cannot write predictions to {path}: {exc}") from exc
    return rows
