"""Classical goodness-of-fit statistics between two probability vectors.

Every statistic takes the null vector ``null_probs`` (strictly positive), a
test vector ``test_probs`` (the empirical distribution ``counts / n`` or any
other probability vector, e.g. a corrected estimator) and the sample size
``n``.  Zero test components are allowed.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_pair",
    "pearson_q",
    "kullback_g",
    "read_cressie",
    "ku_corrected_g",
]

_SUM_TOL = 1e-9


def check_pair(null_probs, test_probs, n) -> tuple[np.ndarray, np.ndarray, int]:
    """Validate and coerce a (null, test, n) triple.

    Raises ``ValueError`` when the null has a zero (or negative) component,
    when the lengths differ, or when either vector is not normalized.
    """
    p = np.asarray(null_probs, dtype=float)
    q = np.asarray(test_probs, dtype=float)
    if p.ndim != 1 or q.ndim != 1:
        raise ValueError("probability vectors must be one-dimensional")
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: null has {p.size} cells, test has {q.size}")
    if p.size < 2:
        raise ValueError("at least two categories are required")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if np.any(p <= 0) or not np.all(np.isfinite(p)):
        bad = np.flatnonzero(~(p > 0))
        raise ValueError(f"null probabilities must be strictly positive; offending cells {bad.tolist()}")
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise ValueError("test probabilities must be nonnegative and finite")
    for name, v in (("null", p), ("test", q)):
        if abs(v.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"{name} probabilities sum to {v.sum()!r}")
    return p, q, int(n)


def pearson_q(null_probs, test_probs, n: int) -> float:
    """Pearson's statistic ``n * sum((q - p)**2 / p)``."""
    p, q, n = check_pair(null_probs, test_probs, n)
    return float(n * np.sum((q - p) ** 2 / p))


def kullback_g(null_probs, test_probs, n: int) -> float:
    """Likelihood-ratio statistic ``2n * sum(q * log(q / p))`` with 0 log 0 = 0."""
    p, q, n = check_pair(null_probs, test_probs, n)
    pos = q > 0
    return float(2 * n * np.sum(q[pos] * np.log(q[pos] / p[pos])))


def _modified_g(p: np.ndarray, q: np.ndarray, n: int) -> float:
    # lambda -> -1 limit: 2n * sum(p * log(p / q)); zero q cells contribute 0 by convention
    pos = q > 0
    return float(2 * n * np.sum(p[pos] * np.log(p[pos] / q[pos])))


def read_cressie(null_probs, test_probs, n: int, lam: float) -> float:
    """Power-divergence statistic of index ``lam``.

    ``lam = 1`` is Pearson's Q and ``lam = 0`` is the likelihood-ratio G.
    ``lam = -1`` returns its continuity limit.  Cells with a zero test
    probability contribute 0 for every ``lam``; for ``lam <= -1`` that is a
    convention rather than a limit, since the raw sum diverges there.
    """
    p, q, n = check_pair(null_probs, test_probs, n)
    lam = float(lam)
    if lam == 0.0:
        return kullback_g(p, q, n)
    if lam == -1.0:
        return _modified_g(p, q, n)
    pos = q > 0
    qp, pp = q[pos], p[pos]
    # expm1 keeps (ratio**lam - 1) / lam accurate as lam -> 0
    inner = qp * np.expm1(lam * np.log(qp / pp))
    return float(2 * n * np.sum(inner) / (lam * (lam + 1)))


def ku_corrected_g(g_value: float, c: int) -> float:
    """Ku's legacy adjustment: subtract one from G per empty cell."""
    if c < 0:
        raise ValueError("number of zero cells must be nonnegative")
    return float(g_value) - c
