import json
import math

import numpy as np
import pytest

from oracles import prob_some_zero_uniform
from sparsegof.distributions import chi_square_quantile
from sparsegof.simulation import (
    SIM_STATS,
    ReplicateRecord,
    SimConfig,
    empirical_quantile,
    named_distribution,
    perturb,
    quantile_by_c,
    run_simulation,
    table1_distribution,
    zero_count_decay,
)


@pytest.mark.parametrize("j, low", [(1, 20), (2, 50), (3, 70), (4, 90)])
def test_table1_shapes(j, low):
    f = table1_distribution(j)
    assert f.size == 100
    assert abs(f.sum() - 1) <= 1e-12
    assert np.all(f > 0)
    assert np.all(f[:low] == 0.0002)
    assert np.sum(f < 0.5 / 400) == low  # expected frequency below 0.5 at n = 400


def test_table1_printed_levels():
    assert table1_distribution("f1")[-1] == pytest.approx(0.01245, abs=1e-15)
    assert table1_distribution("f2")[-1] == pytest.approx(0.0198, abs=1e-15)
    assert table1_distribution("f3")[-1] == pytest.approx(0.03286667, abs=5e-9)
    assert table1_distribution("f4")[-1] == pytest.approx(0.0982, abs=1e-15)
    with pytest.raises(ValueError):
        table1_distribution(5)


def test_perturbation():
    fp = perturb(table1_distribution(1))
    assert fp[0] == pytest.approx(0.0002 + 1 / 300, abs=1e-15)
    assert fp[90] == pytest.approx(0.01245 - 1 / 300, abs=1e-15)
    assert np.array_equal(fp[10:90], table1_distribution(1)[10:90])
    assert perturb(table1_distribution(4))[90] == pytest.approx(0.094867, abs=1e-6)
    for j in range(1, 5):
        assert abs(perturb(table1_distribution(j)).sum() - 1) <= 1e-12
    low_tail = np.full(100, 0.001)
    low_tail[:90] = 0.99 / 90
    with pytest.raises(ValueError):
        perturb(low_tail)  # last cells would drop below zero


def test_named_distribution():
    assert np.array_equal(named_distribution("fp2"), perturb(table1_distribution(2)))
    assert np.array_equal(named_distribution("F3"), table1_distribution(3))


def test_empirical_quantile_convention():
    values = np.arange(1, 101)
    assert empirical_quantile(values, 0.95) == 95
    assert empirical_quantile(values, 0.951) == 96
    assert empirical_quantile([7.0], 0.95) == 7.0
    assert empirical_quantile([3, 1, 2], 0.5) == 2


def _rec(i, c, v):
    return ReplicateRecord(i, c, {k: v for k in SIM_STATS}, True)


def test_quantile_by_c_constant_values():
    recs = [_rec(i, c, 4.5) for i, c in enumerate([1, 1, 2, 3, 3, 3])]
    table = quantile_by_c(recs)
    assert sorted(table) == [1, 2, 3]
    assert all(row[k] == 4.5 for row in table.values() for k in SIM_STATS)
    assert table[2]["count"] == 1 and table[2]["low_count"]


def test_quantile_by_c_skips_missing_corrected_values():
    recs = [ReplicateRecord(0, 2, {"Q": 1.0, "G": 1.0, "RC23": 1.0, "Qab": None, "Gab": None}, False)]
    row = quantile_by_c(recs)[2]
    assert row["Q"] == 1.0 and row["Qab"] is None


def test_degenerate_sampling_single_record():
    p = np.zeros(10)
    p[0] = 1.0
    cfg = SimConfig(p, np.full(10, 0.1), n=50, reps=1, seed=1)
    rep = run_simulation(cfg)
    assert len(rep.records) == 1
    rec = rep.records[0]
    assert rec.c == 9 and not rec.correction_applicable
    assert rep.excluded == 1
    assert all(r is None for r in rep.rejection_rates["Qab"].values())
    assert all(r in (0.0, 1.0) for r in rep.rejection_rates["Q"].values())


def _small_cfg(**kw):
    base = dict(
        sampling_probs=named_distribution("f2"),
        null_probs=named_distribution("fp2"),
        n=400,
        reps=60,
        seed=77,
    )
    base.update(kw)
    return SimConfig(**base)


def test_aggregates_recomputable_from_records():
    rep = run_simulation(_small_cfg())
    assert sum(row["count"] for row in rep.quantiles_by_c.values()) == rep.config.reps
    for a in rep.config.alphas:
        t = chi_square_quantile(1 - a, 99)
        for k in SIM_STATS:
            vals = [r.values[k] for r in rep.records if r.values[k] is not None]
            assert rep.rejection_rates[k][a] == np.mean(np.array(vals) > t)
            assert 0 <= rep.rejection_rates[k][a] <= 1
    cs = [r.c for r in rep.records]
    assert rep.mode_c == max(set(cs), key=lambda c: (cs.count(c), -c))
    assert rep.threshold_line == pytest.approx(123.22, abs=0.01)


def test_same_seed_same_report_any_worker_count():
    serial = run_simulation(_small_cfg())
    parallel = run_simulation(_small_cfg(), workers=3)
    a = json.dumps(serial.to_dict(include_records=True))
    b = json.dumps(parallel.to_dict(include_records=True))
    assert a == b
    assert serial.records_csv() == parallel.records_csv()


def test_different_seed_changes_records():
    a = run_simulation(_small_cfg(reps=5))
    b = run_simulation(_small_cfg(reps=5, seed=78))
    assert a.records_csv() != b.records_csv()


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(named_distribution("f1"), np.full(50, 0.02))
    with pytest.raises(ValueError):
        SimConfig(named_distribution("f1"), named_distribution("f1"), alphas=(0.0,))
    with pytest.raises(ValueError):
        SimConfig(np.full(4, 0.25), np.array([0.5, 0.5, 0.0, 0.0]))


def test_csv_outputs():
    rep = run_simulation(_small_cfg(reps=10))
    lines = rep.records_csv().splitlines()
    assert lines[0] == "replicate,c,Q,G,RC23,Qab,Gab,applicable"
    assert len(lines) == 11
    q = rep.quantiles_csv().splitlines()
    assert q[0] == "c,count,q95_Q,q95_Qab,q95_G,q95_Gab,q95_RC23,threshold"
    assert sum(int(line.split(",")[1]) for line in q[1:]) == 10
    assert all(float(line.split(",")[-1]) == pytest.approx(123.22, abs=0.01) for line in q[1:])


def test_zero_count_decay_always_empty():
    assert zero_count_decay([0.5, 0.5], [1], reps=50, seed=3) == [(1, 1.0)]


def test_zero_count_decay_large_n():
    (n, est), = zero_count_decay([0.1, 0.2, 0.3, 0.4], [250], reps=200, seed=3)
    assert est == 0.0


def test_zero_count_decay_tracks_inclusion_exclusion():
    reps = 4000
    grid = [5, 10, 20, 40]
    for (n, est), expected in zip(zero_count_decay(np.full(5, 0.2), grid, reps, seed=11),
                                  [prob_some_zero_uniform(5, n) for n in grid]):  # fmt: skip
        se = math.sqrt(expected * (1 - expected) / reps)
        assert abs(est - expected) <= 3 * se + 1e-12, (n, est, expected)
