"""Poisson binomial distribution: exact PMF, likelihoods and the normal approximation.

The exact PMF is computed from the characteristic function evaluated at the
``n + 1`` roots of unity and inverted with a discrete Fourier transform. A
brute-force subset enumeration is kept alongside it as a test oracle.
"""
from __future__ import annotations

import itertools
import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, DegenerateDistributionError, DomainError

ENUMERATION_CAP = 20
UNDERFLOW_SENTINEL = -1e30

# rows of the (roots x voters) characteristic-function matrix per block
_CF_BLOCK_ELEMENTS = 1 << 22


class PoibinMoments(NamedTuple):
    mean: float
    variance: float


def as_probs(p: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate and return success probabilities as a 1-d float array."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("success probabilities must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("success probabilities must lie in [0, 1]")
    return arr


def _check_count(k: int, n: int, name: str = "k") -> int:
    if int(k) != k:
        raise DomainError(f"{name}={k!r} is not an integer count")
    k = int(k)
    if not 0 <= k <= n:
        raise DomainError(f"{name}={k} outside the support 0..{n}")
    return k


def pmf_enumerate(p, k: int, cap: int = ENUMERATION_CAP) -> float:
    """P(D = k) by summing over every k-subset of successes.

    Exponential cost; only meant as an oracle for small ``n``.
    """
    p = as_probs(p)
    n = p.size
    if n > cap:
        raise CapacityError(f"enumeration over n={n} voters exceeds cap {cap}")
    k = _check_count(k, n)
    if k == 0:
        return float(np.prod(1.0 - p))
    subsets = np.array(list(itertools.combinations(range(n), k)), dtype=np.intp)
    mask = np.zeros((subsets.shape[0], n), dtype=bool)
    mask[np.arange(subsets.shape[0])[:, None], subsets] = True
    terms = np.where(mask, p, 1.0 - p).prod(axis=1)
    return float(math.fsum(terms))


def characteristic_function(p) -> np.ndarray:
    """Characteristic function of D at the first ``n // 2 + 1`` of the ``n + 1`` roots of unity.

    Every factor ``1 - p + p * w`` has modulus at most one, so the running
    product cannot overflow; it can only underflow toward zero at roots where
    the transform is negligible anyway.
    """
    p = as_probs(p)
    n = p.size
    m = n + 1
    half = m // 2 + 1
    out = np.empty(half, dtype=complex)
    block = max(1, _CF_BLOCK_ELEMENTS // n)
    q = 1.0 - p
    for start in range(0, half, block):
        ell = np.arange(start, min(half, start + block))
        roots = np.exp(2j * np.pi * ell / m)
        out[start:start + ell.size] = (q[None, :] + p[None, :] * roots[:, None]).prod(axis=1)
    return out


def pmf_dft_all(p) -> np.ndarray:
    """Full PMF vector P(D = 0), ..., P(D = n), clamped to [0, 1]."""
    p = as_probs(p)
    m = p.size + 1
    cf = characteristic_function(p)
    # pmf_k = (1/m) sum_l cf_l exp(-2 pi i l k / m); cf is Hermitian in l
    pmf = np.fft.irfft(np.conj(cf), n=m)
    return np.clip(pmf, 0.0, 1.0)


def pmf_dft(p, k: int) -> float:
    p = as_probs(p)
    k = _check_count(k, p.size)
    return float(pmf_dft_all(p)[k])


def cdf_dft(p, k: int) -> float:
    p = as_probs(p)
    k = _check_count(k, p.size)
    return float(min(1.0, math.fsum(pmf_dft_all(p)[: k + 1])))


def loglik_exact(p, D: int, return_flag: bool = False):
    """Exact log P(D) under the Poisson binomial.

    A PMF that underflows to zero yields ``UNDERFLOW_SENTINEL`` instead of
    ``-inf``; pass ``return_flag=True`` to also get the underflow flag.
    """
    p = as_probs(p)
    D = _check_count(D, p.size, "D")
    prob = pmf_dft_all(p)[D]
    underflow = not prob > 0.0
    value = UNDERFLOW_SENTINEL if underflow else math.log(prob)
    if return_flag:
        return value, underflow
    return value


def moments(p) -> PoibinMoments:
    p = as_probs(p)
    return PoibinMoments(float(p.sum()), float((p * (1.0 - p)).sum()))


def loglik_normal(p, D: float) -> float:
    """Gaussian approximation -log(sd) - (D - mean)^2 / (2 var), 2*pi constant dropped."""
    mean, var = moments(p)
    if var <= 0.0:
        raise DegenerateDistributionError("normal approximation needs positive variance")
    return -0.5 * math.log(var) - (D - mean) ** 2 / (2.0 * var)


def normal_density(k, mean: float, var: float):
    k = np.asarray(k, dtype=float)
    return np.exp(-((k - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def lyapunov_ratio(p) -> float:
    """Fourth-moment Lyapunov ratio sum E(X_i - p_i)^4 / s^4.

    It tends to zero when the normal approximation is trustworthy.
    """
    p = as_probs(p)
    v = p * (1.0 - p)
    s2 = v.sum()
    if s2 <= 0.0:
        raise DegenerateDistributionError("Lyapunov ratio undefined for zero variance")
    return float((v * (3.0 * p * p - 3.0 * p + 1.0)).sum() / (s2 * s2))
