"""Monte Carlo harness for type I risk, power and quantiles of the statistics.

Replicate ``i`` draws its counts from ``RandomStream(seed, i)``; results are
folded in replicate order, so reports do not depend on the number of worker
processes.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import correction as corr
from .distributions import RandomStream, check_probability_vector, chi_square_quantile, sample_multinomial
from .statistics import kullback_g, pearson_q, read_cressie

__all__ = [
    "SIM_STATS",
    "SimConfig",
    "ReplicateRecord",
    "SimulationReport",
    "table1_distribution",
    "perturb",
    "named_distribution",
    "simulate_replicate",
    "run_simulation",
    "empirical_quantile",
    "quantile_by_c",
    "rejection_rates",
    "zero_count_decay",
]

SIM_STATS = ("Q", "G", "RC23", "Qab", "Gab")
CORRECTED = ("Qab", "Gab")
DEFAULT_ALPHAS = (0.01, 0.05, 0.1)
DEFAULT_SEED = 20090601
SHIFT = 1 / 300

# number of low-probability cells in f1..f4; the remaining mass is spread evenly
_TABLE1_LOW = {1: 20, 2: 50, 3: 70, 4: 90}
_LOW_PROB = 0.0002


def table1_distribution(which) -> np.ndarray:
    """Sparse null distributions f1..f4 on 100 cells.

    ``which`` is 1..4 or ``"f1"``..``"f4"``.  The high-probability level is
    computed as ``(1 - 0.0002 k) / (100 - k)`` so the vector is exactly
    normalized (for f3 this is 0.0328666..., usually printed 0.03286667).
    """
    j = int(str(which).lstrip("f"))
    if j not in _TABLE1_LOW:
        raise ValueError(f"unknown distribution {which!r}; expected f1..f4")
    k = _TABLE1_LOW[j]
    high = (1.0 - _LOW_PROB * k) / (100 - k)
    return np.concatenate([np.full(k, _LOW_PROB), np.full(100 - k, high)])


def perturb(f) -> np.ndarray:
    """Move 1/300 of mass from each of the last ten cells to each of the first ten."""
    f = np.asarray(f, dtype=float)
    if f.shape != (100,):
        raise ValueError("perturbation is defined for vectors of length 100")
    out = f.copy()
    out[:10] += SHIFT
    out[90:] -= SHIFT
    if np.any(out <= 0):
        raise ValueError("perturbation produces a nonpositive probability")
    return out


def named_distribution(name: str) -> np.ndarray:
    """``f1``..``f4`` or their perturbations ``fp1``..``fp4``."""
    name = name.strip().lower()
    if name.startswith("fp"):
        return perturb(table1_distribution(name[2:]))
    return table1_distribution(name)


@dataclass(frozen=True)
class SimConfig:
    sampling_probs: np.ndarray
    null_probs: np.ndarray
    n: int = 400
    reps: int = 1000
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    seed: int = DEFAULT_SEED
    h: float = corr.DEFAULT_H
    epsilon: float | None = None

    def __post_init__(self):
        sp = check_probability_vector(self.sampling_probs, name="sampling_probs")
        nl = check_probability_vector(self.null_probs, name="null_probs")
        if sp.shape != nl.shape:
            raise ValueError("sampling and null vectors differ in length")
        if np.any(nl <= 0):
            raise ValueError("null probabilities must be strictly positive")
        if self.n < 1 or self.reps < 1:
            raise ValueError("n and reps must be positive")
        if not all(0 < a < 1 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1)")
        object.__setattr__(self, "sampling_probs", sp)
        object.__setattr__(self, "null_probs", nl)
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    @property
    def R(self) -> int:
        return int(self.null_probs.size)

    @property
    def df(self) -> int:
        return self.R - 1


@dataclass(frozen=True)
class ReplicateRecord:
    replicate_index: int
    c: int
    values: dict[str, float | None]
    correction_applicable: bool


def _replicate_values(x: np.ndarray, p0: np.ndarray, h: float, epsilon) -> tuple[dict, bool]:
    n = int(x.sum())
    p_star = x / n
    values: dict[str, float | None] = {
        "Q": pearson_q(p0, p_star, n),
        "G": kullback_g(p0, p_star, n),
        "RC23": read_cressie(p0, p_star, n, 2 / 3),
        "Qab": None,
        "Gab": None,
    }
    try:
        est = corr.fit_correction(x, h=h, epsilon=epsilon)
    except (corr.UniformNonzero, corr.EmptyInterval):
        return values, False
    values["Qab"] = corr.corrected_q(p0, x, est).value
    values["Gab"] = corr.corrected_g(p0, x, est).value
    return values, True


def simulate_replicate(cfg: SimConfig, index: int) -> ReplicateRecord:
    x = sample_multinomial(cfg.n, cfg.sampling_probs, RandomStream(cfg.seed, index))
    values, ok = _replicate_values(x, cfg.null_probs, cfg.h, cfg.epsilon)
    return ReplicateRecord(index, int(np.sum(x == 0)), values, ok)


def _run_chunk(cfg: SimConfig, indices: range) -> list[ReplicateRecord]:
    return [simulate_replicate(cfg, i) for i in indices]


def empirical_quantile(values, q: float) -> float:
    """Type-1 inverse-cdf quantile: the ``ceil(q*m)``-th smallest of ``m`` values."""
    v = np.sort(np.asarray(values, dtype=float))
    m = v.size
    if m == 0:
        raise ValueError("quantile of an empty sample")
    # guard against q*m landing a hair above an integer
    k = min(m, max(1, math.ceil(q * m - 1e-9)))
    return float(v[k - 1])


def quantile_by_c(records, alpha: float = 0.05) -> dict[int, dict]:
    """Per zero-count group: sample count and the (1 - alpha) quantile of each statistic.

    Groups with fewer than ``1/alpha`` replicates are flagged ``low_count``;
    their quantile is just the group maximum.
    """
    records = list(records)
    if not records:
        raise ValueError("no records")
    groups: dict[int, list[ReplicateRecord]] = {}
    for rec in records:
        groups.setdefault(rec.c, []).append(rec)
    out = {}
    for c in sorted(groups):
        recs = groups[c]
        row: dict = {"count": len(recs), "low_count": len(recs) < math.ceil(1 / alpha - 1e-9)}
        for name in SIM_STATS:
            vals = [r.values[name] for r in recs if r.values[name] is not None]
            row[name] = empirical_quantile(vals, 1 - alpha) if vals else None
        out[c] = row
    return out


def rejection_rates(records, alphas, df: int) -> dict[str, dict[float, float | None]]:
    """Fraction of values above the chi-square (1 - alpha) quantile.

    Corrected statistics are rated over the replicates where they exist.
    """
    out: dict[str, dict[float, float | None]] = {name: {} for name in SIM_STATS}
    thresholds = {a: chi_square_quantile(1 - a, df) for a in alphas}
    for name in SIM_STATS:
        vals = np.array([r.values[name] for r in records if r.values[name] is not None], dtype=float)
        for a, t in thresholds.items():
            out[name][a] = float(np.mean(vals > t)) if vals.size else None
    return out


@dataclass
class SimulationReport:
    config: SimConfig
    records: list[ReplicateRecord]
    quantiles_by_c: dict[int, dict]
    rejection_rates: dict[str, dict[float, float | None]]
    mode_c: int
    threshold_line: float
    excluded: int
    extras: dict = field(default_factory=dict)

    def to_dict(self, include_records: bool = False) -> dict:
        cfg = self.config
        data = {
            "schema_version": 1,
            "config": {
                "n": cfg.n,
                "R": cfg.R,
                "reps": cfg.reps,
                "alphas": list(cfg.alphas),
                "seed": cfg.seed,
                "h": cfg.h,
                "epsilon": cfg.epsilon,
                "df": cfg.df,
            },
            "mode_c": self.mode_c,
            "threshold_line": self.threshold_line,
            "excluded": self.excluded,
            "rejection_rates": {
                name: {repr(float(a)): r for a, r in rates.items()} for name, rates in self.rejection_rates.items()
            },
            "quantiles_by_c": [{"c": c, **row} for c, row in self.quantiles_by_c.items()],
            **self.extras,
        }
        if include_records:
            data["records"] = [
                {"replicate": r.replicate_index, "c": r.c, **r.values, "applicable": r.correction_applicable}
                for r in self.records
            ]
        return data

    def records_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replicate", "c", *SIM_STATS, "applicable"])
        for r in self.records:
            w.writerow(
                [r.replicate_index, r.c, *(_fmt(r.values[k]) for k in SIM_STATS), int(r.correction_applicable)]
            )
        return buf.getvalue()

    def quantiles_csv(self) -> str:
        """Plotting table: one row per observed zero count."""
        cols = ("Q", "Qab", "G", "Gab", "RC23")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["c", "count", *(f"q95_{k}" for k in cols), "threshold"])
        for c, row in self.quantiles_by_c.items():
            w.writerow([c, row["count"], *(_fmt(row[k]) for k in cols), _fmt(self.threshold_line)])
        return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def run_simulation(cfg: SimConfig, workers: int = 1) -> SimulationReport:
    """Run ``cfg.reps`` replicates and aggregate them.

    With ``workers > 1`` replicates are spread over processes in contiguous
    chunks; output is identical to the serial run.
    """
    if workers <= 1 or cfg.reps < 2:
        records = _run_chunk(cfg, range(cfg.reps))
    else:
        step = math.ceil(cfg.reps / (workers * 4))
        chunks = [range(i, min(i + step, cfg.reps)) for i in range(0, cfg.reps, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
        records = [rec for part in parts for rec in part]
    records.sort(key=lambda r: r.replicate_index)

    counts = Counter(r.c for r in records)
    mode_c = min(counts, key=lambda c: (-counts[c], c))
    return SimulationReport(
        config=cfg,
        records=records,
        quantiles_by_c=quantile_by_c(records, 0.05),
        rejection_rates=rejection_rates(records, cfg.alphas, cfg.df),
        mode_c=mode_c,
        threshold_line=chi_square_quantile(0.95, cfg.df),
        excluded=sum(not r.correction_applicable for r in records),
    )


def zero_count_decay(p0, n_grid, reps: int, seed: int) -> list[tuple[int, float]]:
    """Empirical P(at least one empty cell) for each sample size in ``n_grid``."""
    p0 = check_probability_vector(p0, name="p0")
    if np.any(p0 <= 0):
        raise ValueError("p0 must be strictly positive")
    out = []
    for k, n in enumerate(n_grid):
        hits = 0
        for r in range(reps):
            x = sample_multinomial(n, p0, RandomStream(seed, k * reps + r))
            hits += bool(np.any(x == 0))
        out.append((int(n), hits / reps))
    return out
