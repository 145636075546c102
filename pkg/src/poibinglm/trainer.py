"""Incremental gradient training of Poisson binomial GLMs.

Each epoch visits the precincts in a fixed order and takes one ascent step on
the approximate log-likelihood after every precinct. The step size decays per
epoch as ``learning_rate / epoch ** anneal_exponent``. Gradients with a tiny
norm are skipped; large ones are rescaled to ``clip_norm``.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import poibin
from .dataset import Dataset
from .errors import DegenerateDistributionError, InputError, NumericError
from .glm import PROB_FLOOR, LogisticParams, ModelParams, NeuralParams, grad

logger = logging.getLogger(__name__)

UPDATE_MODES = ("per_precinct", "batch", "stochastic")
MODEL_KINDS = ("logistic", "neural")


@dataclass(frozen=True)
class FitConfig:
    learning_rate: float = 1e-4
    anneal_exponent: float = 0.5
    epochs: int = 20
    clip_norm: float = 5.0
    skip_norm: float = 1e-8
    l2_lambda: float = 0.0
    hidden_size: int = 10
    seed: int = 0
    track_exact_loss: bool = False
    # evaluate the exact loss on only the first N precincts (None: all)
    exact_subsample: Optional[int] = None
    update_mode: str = "per_precinct"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InputError("learning_rate must be > 0")
        if self.epochs < 0:
            raise InputError("epochs must be >= 0")
        if not self.clip_norm > self.skip_norm > 0:
            raise InputError("need clip_norm > skip_norm > 0")
        if self.l2_lambda < 0:
            raise InputError("l2_lambda must be >= 0")
        if self.hidden_size < 1:
            raise InputError("hidden_size must be >= 1")
        if self.anneal_exponent < 0:
            raise InputError("anneal_exponent must be >= 0")
        if self.update_mode not in UPDATE_MODES:
            raise InputError(f"update_mode must be one of {UPDATE_MODES}")
        if self.exact_subsample is not None and self.exact_subsample < 1:
            raise InputError("exact_subsample must be >= 1")

    def learning_rate_at(self, epoch: int) -> float:
        """Step size used during 1-based ``epoch``."""
        return self.learning_rate / epoch ** self.anneal_exponent


@dataclass
class FitReport:
    params: ModelParams
    approx_nll: list[float] = field(default_factory=list)
    exact_nll: Optional[list[float]] = None
    # approximate loss over the same precincts as exact_nll when subsampled
    exact_scope_approx_nll: Optional[list[float]] = None
    learning_rates: list[float] = field(default_factory=list)
    epochs_run: int = 0
    clipped_count: int = 0
    skipped_count: int = 0
    degenerate_skips: int = 0
    exact_underflows: int = 0
    wall_time_s: float = 0.0
    config: Optional[FitConfig] = None

    def to_json(self, include_wall_time: bool = True) -> dict:
        out = {
            "approx_nll": self.approx_nll,
            "exact_nll": self.exact_nll,
            "exact_scope_approx_nll": self.exact_scope_approx_nll,
            "learning_rates": self.learning_rates,
            "epochs_run": self.epochs_run,
            "clipped_count": self.clipped_count,
            "skipped_count": self.skipped_count,
            "degenerate_skips": self.degenerate_skips,
            "exact_underflows": self.exact_underflows,
            "params": self.params.to_dict(),
            "config": asdict(self.config) if self.config else None,
        }
        if include_wall_time:
            out["wall_time_s"] = self.wall_time_s
        return out


def init_params(kind: str, d: int, config: FitConfig = FitConfig()) -> ModelParams:
    """Zero logistic coefficients, or small uniform neural weights with zero biases."""
    if d < 1:
        raise InputError("need at least one covariate")
    if kind == "logistic":
        return LogisticParams(np.zeros(d + 1))
    if kind == "neural":
        rng = np.random.default_rng(config.seed)
        h = config.hidden_size
        w1 = rng.uniform(-0.1, 0.1, (h, d))
        w2 = rng.uniform(-0.1, 0.1, h)
        return NeuralParams(w1, np.zeros(h), w2, 0.0)
    raise InputError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def clip_or_skip(g: ModelParams, config: FitConfig):
    """Return ``(gradient or None, clipped)``.

    ``None`` means the gradient norm fell below ``skip_norm`` and the update
    should be skipped. Neural gradients are measured and scaled as one vector.
    """
    v = g.to_vector()
    if not np.all(np.isfinite(v)):
        raise NumericError("non-finite gradient")
    norm = float(np.linalg.norm(v))
    if norm < config.skip_norm:
        return None, False
    if norm > config.clip_norm:
        return g.from_vector(v * (config.clip_norm / norm)), True
    return g, False


def _segment_sums(values: np.ndarray, offsets: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    out = np.zeros(sizes.size)
    nonempty = sizes > 0
    if values.size:
        out[nonempty] = np.add.reduceat(values, offsets[nonempty])
    return out


def precinct_approx_logliks(dataset: Dataset, params: ModelParams) -> np.ndarray:
    """Per-precinct approximate log-likelihood; NaN marks degenerate precincts."""
    if len(dataset) == 0:
        return np.empty(0)
    X, offsets = dataset.stacked
    if X.shape[1] != params.n_features:
        raise InputError(
            f"params expect {params.n_features} covariates, dataset has {X.shape[1]}")
    sizes = np.array([p.n_voters for p in dataset.precincts], dtype=np.intp)
    p = np.clip(dataset.voter_probs(params), PROB_FLOOR, 1.0 - PROB_FLOOR)
    mu = _segment_sums(p, offsets, sizes)
    var = _segment_sums(p * (1.0 - p), offsets, sizes)
    D, T = dataset.counts
    out = np.full(len(dataset), np.nan)
    ok = (var > 0) & (T > 0) & (sizes > 0)
    out[ok] = -0.5 * np.log(var[ok]) - (D[ok] - mu[ok]) ** 2 / (2.0 * var[ok])
    return out


def precinct_exact_logliks(dataset: Dataset, params: ModelParams):
    """Per-precinct exact log-likelihood and the number of underflowed precincts.

    A count outside ``0..n_voters`` (possible when the voter file is shorter
    than the vote total) has zero probability and also gets the sentinel.
    """
    out = np.empty(len(dataset))
    underflows = 0
    all_p = dataset.voter_probs(params)
    _, offsets = dataset.stacked
    for k, pr in enumerate(dataset.precincts):
        p = all_p[offsets[k]:offsets[k] + pr.n_voters]
        if pr.n_voters == 0 or pr.D > pr.n_voters:
            out[k] = poibin.UNDERFLOW_SENTINEL
            underflows += 1
            continue
        out[k], flag = poibin.loglik_exact(p, pr.D, return_flag=True)
        underflows += flag
    return out, underflows


def dataset_loss(dataset: Dataset, params: ModelParams, exact: bool = False,
                 return_count: bool = False):
    """Negative log-likelihood summed over precincts.

    With ``return_count`` also returns the number of precincts that were
    skipped as degenerate (approximate) or hit the underflow sentinel (exact).
    """
    if exact:
        values, count = precinct_exact_logliks(dataset, params)
    else:
        values = precinct_approx_logliks(dataset, params)
        count = int(np.isnan(values).sum())
        values = values[~np.isnan(values)]
    loss = -math.fsum(values.tolist())
    if return_count:
        return loss, count
    return loss


def fit(dataset: Dataset, kind: str = "logistic", config: FitConfig = FitConfig(),
        callback: Callable[[int, ModelParams], None] | None = None,
        init: ModelParams | None = None) -> FitReport:
    """Train a model by incremental gradient ascent on the approximate log-likelihood.

    ``callback(epoch, params)`` runs after each epoch's loss evaluation.
    """
    if len(dataset) == 0:
        raise InputError("cannot fit an empty dataset")
    start = time.perf_counter()
    params = init if init is not None else init_params(kind, dataset.n_features, config)
    if params.n_features != dataset.n_features:
        raise InputError("initial params do not match the dataset's covariate dimension")
    mask = params.penalty_mask()
    rng = np.random.default_rng(config.seed)
    report = FitReport(params=params, config=config)
    exact_scope = None
    if config.track_exact_loss:
        report.exact_nll = []
        if config.exact_subsample is not None and config.exact_subsample < len(dataset):
            exact_scope = dataset.subset(range(config.exact_subsample))
            report.exact_scope_approx_nll = []
        else:
            exact_scope = dataset

    n = len(dataset)
    precincts = dataset.precincts
    for epoch in range(1, config.epochs + 1):
        lr = config.learning_rate_at(epoch)
        report.learning_rates.append(lr)

        def apply(g: ModelParams) -> None:
            nonlocal params
            v = params.to_vector()
            step = g.to_vector()
            if config.l2_lambda > 0:
                step = step - config.l2_lambda * mask * v
            params = params.from_vector(v + lr * step)

        if config.update_mode == "batch":
            total = None
            for k in range(n):
                try:
                    g = grad(params, precincts[k]).to_vector()
                except DegenerateDistributionError:
                    report.degenerate_skips += 1
                    continue
                total = g if total is None else total + g
            if total is not None:
                g, clipped = _checked_clip(params.from_vector(total), config, epoch, None)
                report.clipped_count += clipped
                if g is None:
                    report.skipped_count += 1
                else:
                    apply(g)
        else:
            order = rng.permutation(n) if config.update_mode == "stochastic" else range(n)
            for k in order:
                precinct = precincts[k]
                if precinct.T == 0 or precinct.n_voters == 0:
                    report.degenerate_skips += 1
                    continue
                try:
                    g = grad(params, precinct)
                except DegenerateDistributionError:
                    report.degenerate_skips += 1
                    continue
                g, clipped = _checked_clip(g, config, epoch, precinct.key)
                report.clipped_count += clipped
                if g is None:
                    report.skipped_count += 1
                    continue
                apply(g)

        loss = dataset_loss(dataset, params)
        if not math.isfinite(loss):
            raise NumericError(f"non-finite approximate loss after epoch {epoch}")
        report.approx_nll.append(loss)
        if exact_scope is not None:
            exact, underflows = dataset_loss(exact_scope, params, exact=True, return_count=True)
            report.exact_nll.append(exact)
            report.exact_underflows += underflows
            if report.exact_scope_approx_nll is not None:
                report.exact_scope_approx_nll.append(dataset_loss(exact_scope, params))
        report.epochs_run = epoch
        report.params = params
        logger.info("epoch %d lr=%.3g approx_nll=%.6f", epoch, lr, loss)
        if callback is not None:
            callback(epoch, params)

    report.params = params
    report.wall_time_s = time.perf_counter() - start
    return report


def _checked_clip(g, config, epoch, key):
    try:
        return clip_or_skip(g, config)
    except NumericError as exc:
        where = f"precinct {key}" if key is not None else "batch gradient"
        raise NumericError(f"{exc} at epoch {epoch}, {where}") from None
