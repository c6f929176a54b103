"""Chi-square distribution kernel and seeded multinomial sampling.

The chi-square cdf is the regularized lower incomplete gamma function
``P(df/2, x/2)``, evaluated with the usual series / continued-fraction split.
Random draws come from :class:`RandomStream` descriptors so that replicate
``i`` of any experiment always sees the same numbers, whatever the order in
which replicates are executed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

_EPS = 1e-16
_MAX_ITER = 100_000
_TINY = 1e-300
_SEED_MASK = (1 << 64) - 1


def _check_df(df: int) -> int:
    if isinstance(df, bool) or int(df) != df or df < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {df!r}")
    return int(df)


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by its power series; converges quickly for x < a + 1.
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_frac(a: float, x: float) -> float:
    # Q(a, x) = 1 - P(a, x) by modified Lentz; used for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def _regularized_gamma(a: float, x: float) -> tuple[float, float]:
    """Return ``(P(a, x), Q(a, x))`` computed from the better-conditioned side."""
    if x == 0.0:
        return 0.0, 1.0
    if x < a + 1.0:
        p = _gamma_series(a, x)
        return p, 1.0 - p
    q = _gamma_cont_frac(a, x)
    return 1.0 - q, q


def chi_square_cdf(x: float, df: int) -> float:
    """P(X <= x) for X ~ chi-square with ``df`` degrees of freedom."""
    df = _check_df(df)
    x = float(x)
    if not x >= 0.0:
        raise ValueError(f"chi-square cdf requires x >= 0, got {x!r}")
    if math.isinf(x):
        return 1.0
    return _regularized_gamma(0.5 * df, 0.5 * x)[0]


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail P(X > x). Negative ``x`` is allowed and gives 1.

    Corrected statistics can be negative, so the survival function is
    defined on the whole real line for p-value purposes.
    """
    df = _check_df(df)
    x = float(x)
    if math.isnan(x):
        raise ValueError("chi-square sf of NaN")
    if x <= 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return _regularized_gamma(0.5 * df, 0.5 * x)[1]


def chi_square_quantile(p: float, df: int) -> float:
    """Inverse of :func:`chi_square_cdf` for ``0 < p < 1``."""
    df = _check_df(df)
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile order must lie in (0, 1), got {p!r}")
    hi = float(max(df, 1))
    while chi_square_cdf(hi, df) < p:
        hi *= 2.0
    return brentq(
        lambda x: chi_square_cdf(x, df) - p, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500
    )


@dataclass(frozen=True)
class ChiSquare:
    """Chi-square reference distribution with ``df`` degrees of freedom."""

    df: int

    def __post_init__(self) -> None:
        _check_df(self.df)

    def cdf(self, x: float) -> float:
        return chi_square_cdf(x, self.df)

    def sf(self, x: float) -> float:
        return chi_square_sf(x, self.df)

    def quantile(self, p: float) -> float:
        return chi_square_quantile(p, self.df)


@dataclass(frozen=True)
class RandomStream:
    """Immutable descriptor of one reproducible random substream.

    Every call to :meth:`generator` builds a fresh generator in the same
    initial state, so two holders of equal descriptors draw identical
    sequences. Distinct ``stream_index`` values map to independent
    ``SeedSequence`` children of ``seed``.
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed) & _SEED_MASK, spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index: int) -> RandomStream:
        return RandomStream(self.seed, index)


def _as_generator(rng: RandomStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator()
    return rng


def check_probability_vector(p, *, tol: float = 1e-12, name: str = "p") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d probability vector")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} has non-finite components")
    if np.any(p < 0):
        raise ValueError(f"{name} has a negative component")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"{name} sums to {p.sum()!r}, not 1")
    return p


def sample_multinomial(n: int, p, rng: RandomStream | np.random.Generator) -> np.ndarray:
    """Draw one count vector from M(n; p) by sequential conditional binomials.

    ``rng`` is either a :class:`RandomStream` (a fresh generator is built
    from it, so the draw is a pure function of the descriptor) or a live
    ``numpy.random.Generator`` that is advanced in place.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    p = check_probability_vector(p)
    gen = _as_generator(rng)

    # tail[r] = p[r] + ... + p[R-1]; an exactly empty tail forces q = 1
    tail = np.cumsum(p[::-1])[::-1]
    out = np.zeros(p.size, dtype=np.int64)
    remaining = n
    for r in range(p.size - 1):
        if remaining == 0:
            break
        if tail[r + 1] == 0.0:
            q = 1.0
        else:
            q = min(1.0, p[r] / tail[r])
        k = int(gen.binomial(remaining, q)) if q > 0.0 else 0
        out[r] = k
        remaining -= k
    out[-1] += remaining
    return out
