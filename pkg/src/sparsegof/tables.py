"""Two-way contingency tables and the end-to-end test pipeline.

Tables are flattened row-major before any statistic is computed; the report
keeps the shape and labels so a cell index ``r`` maps back to
``divmod(r, J)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import correction as corr
from .distributions import chi_square_quantile, chi_square_sf
from .statistics import check_pair, kullback_g, ku_corrected_g, pearson_q, read_cressie

__all__ = [
    "DegenerateTable",
    "ContingencyTable",
    "TestReport",
    "STAT_NAMES",
    "CORRECTED_STATS",
    "preprocess",
    "independence_null",
    "sparsity_diagnostics",
    "run_independence_test",
    "run_gof_test",
]

SCHEMA_VERSION = 1
STAT_NAMES = ("Q", "G", "RC", "Qab", "Gab", "Ku")
CORRECTED_STATS = ("Qab", "Gab")
SPARSITY_THRESHOLDS = {"below_0_5": 0.5, "below_1": 1.0, "below_5": 5.0}


class DegenerateTable(ValueError):
    """Fewer than two nonempty rows or columns remain."""


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        x = np.asarray(self.counts)
        if x.ndim != 2:
            raise ValueError("a contingency table must be two-dimensional")
        if np.any(x < 0) or not np.all(np.equal(np.mod(x, 1), 0)):
            raise ValueError("table entries must be nonnegative integers")
        x = x.astype(np.int64)
        x.setflags(write=False)
        object.__setattr__(self, "counts", x)
        rows = tuple(self.row_labels) or tuple(f"row{i + 1}" for i in range(x.shape[0]))
        cols = tuple(self.col_labels) or tuple(f"col{j + 1}" for j in range(x.shape[1]))
        if len(rows) != x.shape[0] or len(cols) != x.shape[1]:
            raise ValueError("label count does not match table shape")
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def flatten(self) -> np.ndarray:
        return self.counts.ravel(order="C")


def preprocess(table: ContingencyTable) -> ContingencyTable:
    """Drop all-zero rows and columns."""
    if table.n < 1:
        raise DegenerateTable("table is empty")
    keep_r = table.counts.sum(axis=1) > 0
    keep_c = table.counts.sum(axis=0) > 0
    if keep_r.sum() < 2 or keep_c.sum() < 2:
        raise DegenerateTable(
            f"only {int(keep_r.sum())} nonempty row(s) and {int(keep_c.sum())} nonempty column(s) remain"
        )
    return ContingencyTable(
        table.counts[keep_r][:, keep_c],
        tuple(lab for lab, k in zip(table.row_labels, keep_r) if k),
        tuple(lab for lab, k in zip(table.col_labels, keep_c) if k),
    )


def independence_null(table: ContingencyTable) -> tuple[np.ndarray, int]:
    """Product of the observed margins, flattened row-major, and its parameter count."""
    x = table.counts
    n = x.sum()
    rows = x.sum(axis=1) / n
    cols = x.sum(axis=0) / n
    I, J = x.shape
    return np.outer(rows, cols).ravel(), (I - 1) + (J - 1)


def sparsity_diagnostics(expected) -> dict[str, int]:
    e = np.asarray(expected, dtype=float)
    return {key: int(np.sum(e < t)) for key, t in SPARSITY_THRESHOLDS.items()}


@dataclass
class TestReport:
    """Outcome of one goodness-of-fit or independence test.

    ``statistics`` holds Q, G, RC (at ``rc_lambda``), Qab, Gab and Ku; the
    corrected entries are ``None`` when the correction does not apply.
    ``decisions[name]`` is True when that statistic rejects.
    """

    __test__ = False  # not a pytest class

    statistics: dict[str, float | None]
    df: int
    s: int
    alpha: float
    threshold: float
    p_values: dict[str, float | None]
    decisions: dict[str, bool | None]
    combined_decision: bool | None
    sparsity: dict[str, int]
    correction: corr.CorrectionParams | None
    correction_applicable: bool
    correction_note: str | None
    expected: np.ndarray
    counts: np.ndarray
    n: int
    rc_lambda: float
    layout: dict | None = None
    extras: dict = field(default_factory=dict)

    @property
    def R(self) -> int:
        return int(self.counts.size)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "R": self.R,
            "df": self.df,
            "s": self.s,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "rc_lambda": self.rc_lambda,
            "statistics": dict(self.statistics),
            "p_values": dict(self.p_values),
            "decisions": {k: _decision_word(v) for k, v in self.decisions.items()},
            "combined_decision": _decision_word(self.combined_decision),
            "sparsity": dict(self.sparsity),
            "correction_applicable": self.correction_applicable,
            "correction_note": self.correction_note,
            "correction": None if self.correction is None else self.correction.to_dict(),
            "counts": [int(v) for v in self.counts],
            "expected": [float(v) for v in self.expected],
            "layout": self.layout,
        }

    @classmethod
    def from_dict(cls, data: dict) -> TestReport:
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        prm = data["correction"]
        return cls(
            statistics=dict(data["statistics"]),
            df=int(data["df"]),
            s=int(data["s"]),
            alpha=float(data["alpha"]),
            threshold=float(data["threshold"]),
            p_values=dict(data["p_values"]),
            decisions={k: _parse_decision(v) for k, v in data["decisions"].items()},
            combined_decision=_parse_decision(data["combined_decision"]),
            sparsity=dict(data["sparsity"]),
            correction=None if prm is None else corr.CorrectionParams(**prm),
            correction_applicable=bool(data["correction_applicable"]),
            correction_note=data["correction_note"],
            expected=np.asarray(data["expected"], dtype=float),
            counts=np.asarray(data["counts"], dtype=np.int64),
            n=int(data["n"]),
            rc_lambda=float(data["rc_lambda"]),
            layout=data["layout"],
        )


def _decision_word(v: bool | None) -> str | None:
    if v is None:
        return None
    return "reject" if v else "accept"


def _parse_decision(v: str | None) -> bool | None:
    if v is None:
        return None
    if v not in ("reject", "accept"):
        raise ValueError(f"bad decision {v!r}")
    return v == "reject"


def _build_report(counts, null_probs, s, *, alpha, h, epsilon, lam, layout=None) -> TestReport:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    x = np.asarray(counts, dtype=np.int64)
    n = int(x.sum())
    p0, p_star, n = check_pair(null_probs, x / n if n else x, n)
    R = x.size
    df = R - s - 1
    if df < 1:
        raise ValueError(f"degrees of freedom R - s - 1 = {df} must be at least 1")

    part = corr.partition_zeros(x)
    q = pearson_q(p0, p_star, n)
    g = kullback_g(p0, p_star, n)
    stats: dict[str, float | None] = {
        "Q": q,
        "G": g,
        "RC": read_cressie(p0, p_star, n, lam),
        "Qab": None,
        "Gab": None,
        "Ku": ku_corrected_g(g, part.c),
    }
    params = None
    note = None
    try:
        os = corr.order_stats(x, part) if part.c else None
        params = corr.choose_parameters(n, R, part.c, os, h=h, epsilon=epsilon)
    except corr.UniformNonzero as exc:
        note = f"uniform nonzero counts: {exc}"
    if params is not None:
        est = corr.corrected_estimator(x, part, params)
        stats["Qab"] = corr.corrected_q(p0, x, est).value
        stats["Gab"] = corr.corrected_g(p0, x, est).value

    threshold = chi_square_quantile(1.0 - alpha, df)
    p_values = {k: None if v is None else chi_square_sf(v, df) for k, v in stats.items()}
    decisions = {k: None if v is None else bool(v > threshold) for k, v in stats.items()}
    corrected = [decisions[k] for k in CORRECTED_STATS if decisions[k] is not None]
    combined = any(corrected) if corrected else None

    expected = n * p0
    sparsity = {"c": part.c, **sparsity_diagnostics(expected)}
    return TestReport(
        statistics=stats,
        df=df,
        s=s,
        alpha=float(alpha),
        threshold=threshold,
        p_values=p_values,
        decisions=decisions,
        combined_decision=combined,
        sparsity=sparsity,
        correction=params,
        correction_applicable=params is not None,
        correction_note=note,
        expected=expected,
        counts=x,
        n=n,
        rc_lambda=float(lam),
        layout=layout,
    )


def run_independence_test(
    table: ContingencyTable,
    alpha: float = 0.05,
    h: float = corr.DEFAULT_H,
    epsilon: float | None = None,
    lam: float = 2 / 3,
) -> TestReport:
    """Test independence of rows and columns with all six statistics."""
    clean = preprocess(table)
    null, s = independence_null(clean)
    layout = {
        "order": "row-major",
        "shape": list(clean.shape),
        "row_labels": list(clean.row_labels),
        "col_labels": list(clean.col_labels),
        "removed_rows": [r for r in table.row_labels if r not in clean.row_labels],
        "removed_cols": [c for c in table.col_labels if c not in clean.col_labels],
    }
    return _build_report(clean.flatten(), null, s, alpha=alpha, h=h, epsilon=epsilon, lam=lam, layout=layout)


def run_gof_test(
    counts,
    null_probs,
    alpha: float = 0.05,
    h: float = corr.DEFAULT_H,
    epsilon: float | None = None,
    lam: float = 2 / 3,
    s: int = 0,
) -> TestReport:
    """Test ``counts`` against a null probability vector.

    ``s`` is the number of parameters that were estimated to build
    ``null_probs``; it is 0 for a fully specified null.
    """
    x = np.asarray(counts)
    p = np.asarray(null_probs, dtype=float)
    if x.shape != p.shape:
        raise ValueError("counts and null probabilities differ in length")
    if s < 0:
        raise ValueError("s must be nonnegative")
    return _build_report(x, p, s, alpha=alpha, h=h, epsilon=epsilon, lam=lam)
