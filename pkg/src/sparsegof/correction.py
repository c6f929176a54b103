"""Zero-cell correction of Pearson's Q and the likelihood-ratio G.

For a count vector with ``c`` empty cells the empirical distribution
``counts / n`` is replaced by an estimator that puts mass ``a`` on each empty
cell and ``n_j / n**b - d`` on each observed cell ``j``, where the shift
``d = (a*c + n**(1-b) - 1) / (R - c)`` restores normalization.  The
parameters are chosen inside the region where every component lies in
(0, 1) and the observed vector stays the most likely allocation.

Empty cells are tracked by index set, never by reordering the caller's data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .statistics import check_pair, kullback_g, pearson_q

__all__ = [
    "CorrectionError",
    "UniformNonzero",
    "EmptyInterval",
    "MismatchError",
    "InvalidH",
    "ZeroPartition",
    "OrderStats",
    "CorrectionParams",
    "CorrectedEstimator",
    "CorrectedStatistic",
    "DEFAULT_H",
    "EPSILON_FRACTION",
    "partition_zeros",
    "order_stats",
    "compute_b_min",
    "admissible_a_interval",
    "choose_parameters",
    "corrected_estimator",
    "fit_correction",
    "closed_form_f",
    "closed_form_g",
    "corrected_q",
    "corrected_g",
    "check_likelihood_condition",
    "verify_inequality_bruteforce",
]

DEFAULT_H = 0.1
#: default epsilon is this fraction of the admissible width for ``a``
EPSILON_FRACTION = 1e-4
CLOSED_FORM_RTOL = 1e-9


class CorrectionError(ValueError):
    """Base class for failures of the zero-cell correction."""


class UniformNonzero(CorrectionError):
    """All observed cells share the same count; the correction is undefined."""


class EmptyInterval(CorrectionError):
    """No admissible ``a`` exists for the chosen ``b``."""

    def __init__(self, n, R, c, b, a_min, a_max):
        self.n, self.R, self.c, self.b = n, R, c, b
        self.a_min, self.a_max = a_min, a_max
        super().__init__(
            f"empty admissible interval for a: n={n}, R={R}, c={c}, b={b!r}, a_min={a_min!r}, a_max={a_max!r}"
        )


class MismatchError(ArithmeticError):
    """Direct and closed-form evaluations of a corrected statistic disagree."""


class InvalidH(CorrectionError):
    pass


@dataclass(frozen=True)
class ZeroPartition:
    zero_indices: tuple[int, ...]
    nonzero_indices: tuple[int, ...]

    @property
    def c(self) -> int:
        return len(self.zero_indices)

    @property
    def R(self) -> int:
        return len(self.zero_indices) + len(self.nonzero_indices)


@dataclass(frozen=True)
class OrderStats:
    """Extremes of the observed (nonzero) counts.

    ``n_lolo = n - n_lo * (R - c)`` and ``n_hihi = n_hi * (R - c) - n``;
    both are positive whenever ``n_lo < n_hi``.
    """

    n_lo: int
    n_hi: int
    n_lolo: int
    n_hihi: int


@dataclass(frozen=True)
class CorrectionParams:
    c: int
    b_min: float
    b: float
    a_min: float
    a_max: float
    a: float
    epsilon: float
    h: float
    d: float

    @property
    def is_identity(self) -> bool:
        return self.c == 0

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "b_min": self.b_min,
            "b": self.b,
            "a_min": self.a_min,
            "a_max": self.a_max,
            "a": self.a,
            "epsilon": self.epsilon,
            "h": self.h,
            "d": self.d,
        }


@dataclass(frozen=True)
class CorrectedEstimator:
    probs: np.ndarray
    params: CorrectionParams
    partition: ZeroPartition
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())


class CorrectedStatistic(NamedTuple):
    value: float
    closed_form: float


def _counts_array(counts) -> np.ndarray:
    x = np.asarray(counts)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("counts must be a nonempty 1-d vector")
    if not np.all(np.equal(np.mod(x, 1), 0)) or np.any(x < 0):
        raise ValueError("counts must be nonnegative integers")
    return x.astype(np.int64)


def partition_zeros(counts) -> ZeroPartition:
    x = _counts_array(counts)
    if x.sum() < 1:
        raise ValueError("all counts are zero")
    zero = tuple(int(i) for i in np.flatnonzero(x == 0))
    nonzero = tuple(int(i) for i in np.flatnonzero(x > 0))
    return ZeroPartition(zero, nonzero)


def order_stats(counts, part: ZeroPartition) -> OrderStats:
    x = _counts_array(counts)
    n = int(x.sum())
    obs = x[list(part.nonzero_indices)]
    k = obs.size
    lo, hi = int(obs.min()), int(obs.max())
    if lo == hi:
        raise UniformNonzero(f"all {k} observed cells have count {lo}; correction not applicable")
    return OrderStats(n_lo=lo, n_hi=hi, n_lolo=n - lo * k, n_hihi=hi * k - n)


def _log_ratio(v: float, log_n: float) -> float:
    return math.log(v) / log_n if v > 0 else -math.inf


def compute_b_min(n: int, R: int, os: OrderStats) -> float:
    log_n = math.log(n)
    return max(
        0.0,
        _log_ratio(os.n_hihi / (R - 1), log_n),
        _log_ratio(os.n_lolo, log_n),
        _log_ratio(os.n_hi - os.n_lo, log_n),
    )


def admissible_a_interval(n: int, R: int, c: int, os: OrderStats, b: float) -> tuple[float, float]:
    """Open interval ``(a_min, a_max)`` of admissible zero-cell masses for ``b``.

    Each bound is one constraint on the estimator solved for ``a``:

    * largest observed cell below 1: ``a > ((n_hi - n**b)(R-c) - n + n**b) / (c n**b)``
    * smallest observed cell above 0: ``a < (n**b - n_lolo) / (c n**b)``
    * empty cells at most ``1/n`` of the smallest observed cell:
      ``a <= (n**b - n_lolo) / (n**b (n(R-c) + c))``
    * ``0 < a < 1``
    """
    if c < 1:
        raise ValueError("admissible interval is only defined for c >= 1")
    k = R - c
    nb = float(n) ** b
    a_min = max(0.0, ((os.n_hi - nb) * k - n + nb) / (c * nb))
    a_max = min(
        1.0,
        (nb - os.n_lolo) / (c * nb),
        (nb - os.n_lolo) / (nb * (n * k + c)),
    )
    if not a_max > a_min:
        raise EmptyInterval(n, R, c, b, a_min, a_max)
    return a_min, a_max


def _identity_params(h: float) -> CorrectionParams:
    return CorrectionParams(c=0, b_min=0.0, b=1.0, a_min=0.0, a_max=0.0, a=0.0, epsilon=0.0, h=h, d=0.0)


def choose_parameters(
    n: int,
    R: int,
    c: int,
    os: OrderStats | None,
    h: float = DEFAULT_H,
    epsilon: float | None = None,
) -> CorrectionParams:
    """Pick ``b = h + (1 - h) * b_min`` and ``a = a_max(b) - epsilon``.

    ``epsilon=None`` uses ``EPSILON_FRACTION`` of the admissible width; a
    float is taken as an absolute value.  With ``c == 0`` the identity
    parameters (``a = 0``, ``b = 1``) are returned and ``os`` is ignored.
    """
    if not 0.0 < h < 1.0:
        raise InvalidH(f"h must lie in (0, 1), got {h!r}")
    if c == 0:
        return _identity_params(h)
    if os is None:
        raise ValueError("order statistics are required when c > 0")
    b_min = compute_b_min(n, R, os)
    b = h + (1.0 - h) * b_min
    a_min, a_max = admissible_a_interval(n, R, c, os, b)
    width = a_max - max(a_min, 0.0)
    eps = EPSILON_FRACTION * width if epsilon is None else float(epsilon)
    if not 0.0 < eps < width:
        raise CorrectionError(f"epsilon={eps!r} leaves no room inside ({a_min!r}, {a_max!r})")
    a = a_max - eps
    d = (a * c + float(n) ** (1.0 - b) - 1.0) / (R - c)
    return CorrectionParams(c=c, b_min=b_min, b=b, a_min=a_min, a_max=a_max, a=a, epsilon=eps, h=h, d=d)


def corrected_estimator(counts, part: ZeroPartition, params: CorrectionParams) -> CorrectedEstimator:
    x = _counts_array(counts)
    n = int(x.sum())
    if params.c != part.c:
        raise ValueError("parameters were chosen for a different number of zeros")
    if params.c == 0:
        probs = x / n
    else:
        probs = np.empty(x.size, dtype=float)
        nz = list(part.nonzero_indices)
        probs[list(part.zero_indices)] = params.a
        probs[nz] = x[nz] / float(n) ** params.b - params.d
        if not (np.all(probs > 0) and np.all(probs < 1)):
            raise AssertionError(f"corrected estimator left (0, 1): min={probs.min()!r}, max={probs.max()!r}")
    probs.setflags(write=False)
    x.setflags(write=False)
    return CorrectedEstimator(probs=probs, params=params, partition=part, counts=x)


def fit_correction(counts, h: float = DEFAULT_H, epsilon: float | None = None) -> CorrectedEstimator:
    """Partition, choose parameters and build the estimator in one call."""
    x = _counts_array(counts)
    part = partition_zeros(x)
    n = int(x.sum())
    os = order_stats(x, part) if part.c else None
    params = choose_parameters(n, x.size, part.c, os, h=h, epsilon=epsilon)
    return corrected_estimator(x, part, params)


def closed_form_f(null_probs, est: CorrectedEstimator) -> float:
    """Correction term ``f(a, b)`` with ``Q_corrected = n**(2(1-b)) * Q - f``."""
    p = np.asarray(null_probs, dtype=float)
    prm, part = est.params, est.partition
    n = est.n
    zi, nz = list(part.zero_indices), list(part.nonzero_indices)
    s = float(n) ** (1.0 - prm.b)
    x = est.counts[nz]
    return n * (
        1.0
        - s**2
        + 2.0 * s * prm.d * np.sum(x / (n * p[nz]))
        - prm.a**2 * np.sum(1.0 / p[zi])
        - prm.d**2 * np.sum(1.0 / p[nz])
    )


def closed_form_g(null_probs, est: CorrectedEstimator) -> float:
    """Correction term ``g(a, b)`` with ``G_corrected = n**(1-b) * G - g``."""
    p = np.asarray(null_probs, dtype=float)
    prm, part = est.params, est.partition
    n, c, R = est.n, prm.c, part.R
    zi, nz = list(part.zero_indices), list(part.nonzero_indices)
    k = R - c
    nb = float(n) ** prm.b
    x = est.counts[nz]
    shifted = x * k - nb * prm.d * k
    zero_term = prm.a * np.sum(np.log(prm.a / p[zi])) if c else 0.0
    return 2.0 * n * (
        prm.d * np.sum(np.log(shifted / (p[nz] * nb * k)))
        - zero_term
        - float(n) ** (1.0 - prm.b) * np.sum(x / n * np.log(shifted / (x * float(n) ** (prm.b - 1.0) * k)))
    )


def _agree(direct: float, closed: float, scale: float, what: str) -> None:
    # scale is the largest term of the closed form; cancellation error grows with it
    if abs(direct - closed) > CLOSED_FORM_RTOL * max(abs(direct), abs(closed), scale, 1e-300):
        raise MismatchError(f"{what}: direct={direct!r} closed form={closed!r}")


def corrected_q(null_probs, counts, est: CorrectedEstimator) -> CorrectedStatistic:
    x = _counts_array(counts)
    n = int(x.sum())
    p, _, _ = check_pair(null_probs, est.probs, n)
    direct = pearson_q(p, est.probs, n)
    lead = float(n) ** (2.0 * (1.0 - est.params.b)) * pearson_q(p, x / n, n)
    f = closed_form_f(p, est)
    closed = lead - f
    _agree(direct, closed, max(abs(lead), abs(f)), "corrected Q")
    return CorrectedStatistic(direct, closed)


def corrected_g(null_probs, counts, est: CorrectedEstimator) -> CorrectedStatistic:
    x = _counts_array(counts)
    n = int(x.sum())
    p, _, _ = check_pair(null_probs, est.probs, n)
    direct = kullback_g(p, est.probs, n)
    lead = float(n) ** (1.0 - est.params.b) * kullback_g(p, x / n, n)
    g = closed_form_g(p, est)
    closed = lead - g
    _agree(direct, closed, max(abs(lead), abs(g)), "corrected G")
    return CorrectedStatistic(direct, closed)


def check_likelihood_condition(probs, part: ZeroPartition, n: int) -> bool:
    """True iff every empty cell has probability at most ``1/n`` of every observed cell."""
    if part.c == 0 or not part.nonzero_indices:
        return True
    p = np.asarray(probs, dtype=float)
    return bool(p[list(part.zero_indices)].max() <= p[list(part.nonzero_indices)].min() / n)


def _log_multinomial_pmf(k, log_p: np.ndarray, log_fact_n: float) -> float:
    total = log_fact_n
    for ki, lp in zip(k, log_p):
        if ki:
            total += ki * lp - math.lgamma(ki + 1)
    return total


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def verify_inequality_bruteforce(probs, counts, part: ZeroPartition, rtol: float = 1e-12) -> bool:
    """Exhaustively check that the observed vector is at least as likely as
    every allocation that moves mass from observed cells into empty cells.

    Alternatives keep ``n'_j <= n_j`` on observed cells and spread the
    deficit over any subset of the empty cells.  Exponential in the counts;
    intended for small instances only.
    """
    p = np.asarray(probs, dtype=float)
    x = _counts_array(counts)
    n = int(x.sum())
    if part.c == 0:
        return True
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
    log_fact_n = math.lgamma(n + 1)
    observed = _log_multinomial_pmf(x, log_p, log_fact_n)
    zi, nz = list(part.zero_indices), list(part.nonzero_indices)
    alt = np.zeros_like(x)
    for kept in itertools.product(*(range(int(x[j]) + 1) for j in nz)):
        deficit = n - sum(kept)
        if deficit == 0:
            continue
        alt[nz] = kept
        for spread in _compositions(deficit, len(zi)):
            alt[zi] = spread
            value = _log_multinomial_pmf(alt, log_p, log_fact_n)
            if value > observed + rtol * max(1.0, abs(observed)):
                return False
    return True
