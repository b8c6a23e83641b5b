import math
from fractions import Fraction

import numpy as np
import pytest

from raildimer.model import RailYardModel, DimerSample, charge
from raildimer.fock import (
    boundary_schur_process, TruncationPolicy, column_marginals,
)
from raildimer import fastsamp
from raildimer.fastsamp import (
    StructuredPlan, make_engine, is_structured, packed_to_partitions,
)
from raildimer.experiments import ladder_model, pure_reference_model

F = Fraction

BACKEND = "python"


def tiny_ladder(k=1, n_lminus=4, plus_columns=2):
    return ladder_model(n_lminus, ratio=8, k=k, plus_columns=plus_columns)


def _column_counts(chains, idx):
    counts = {}
    for s in range(chains.shape[0]):
        lam = tuple(int(v) for v in chains[s, idx] if v)
        counts[lam] = counts.get(lam, 0) + 1
    return counts


def test_plan_detection():
    m, _ = tiny_ladder()
    assert is_structured(m)
    bad = RailYardModel(0, 1, "RL", "+-", [F(1, 3), F(1, 2)])
    assert not is_structured(bad)
    ok2 = RailYardModel(0, 2, "LLL", "+--", [F(1, 3), F(1, 2), F(1, 2)],
                        left_boundary=(1, 1))
    assert is_structured(ok2)  # empty bulk, suffix "+--"
    bad3 = RailYardModel(0, 2, "LLL", "-+-", [F(1, 3), F(1, 2), F(1, 2)],
                         left_boundary=(5, 5, 5))
    assert not is_structured(bad3)  # cannot peel 3 rows with 1 suffix minus


def test_structured_matches_exact_marginal_tiny():
    model, info = tiny_ladder()
    eng = make_engine(model, backend=BACKEND)
    trunc = TruncationPolicy(model.left_boundary[0] + 12, eng.plan.D + 2)
    mcol = info["measure_col"]
    exact = boundary_schur_process(model, mcol, trunc=trunc)
    n = 20_000
    chains = eng.sample_many(n, seed=5)
    counts = _column_counts(chains, mcol - eng.plan.seam_col)
    from scipy.stats import chi2
    cells = []
    other_p = 1.0
    for lam, p in sorted(exact.entries.items(), key=lambda kv: -kv[1]):
        pf = float(p)
        if pf * n >= 8:
            cells.append((lam, pf))
            other_p -= pf
    stat = 0.0
    used = 0
    for lam, pf in cells:
        c = counts.pop(lam, 0)
        used += c
        stat += (c - n * pf) ** 2 / (n * pf)
    rest = n - used
    if other_p * n > 1e-9:
        stat += (rest - n * other_p) ** 2 / (n * other_p)
        dof = len(cells)
    else:
        assert rest == 0
        dof = len(cells) - 1
    p_val = 1 - chi2.cdf(stat, dof)
    assert p_val > 0.001, (stat, dof, p_val)


def test_structured_chain_is_valid_and_charges_constant():
    model, info = tiny_ladder()
    eng = make_engine(model, backend=BACKEND)
    chains = eng.sample_many(50, seed=9)
    for srow in chains:
        s = DimerSample(packed_to_partitions(srow), start_column=eng.plan.seam_col)
        s.validate(model)
        vals = {charge(s, mcol) for mcol in s.column_range()}
        assert len(vals) == 1


def test_structured_mean_sizes_match_exact():
    model, info = tiny_ladder(k=1, n_lminus=4, plus_columns=3)
    eng = make_engine(model, backend=BACKEND)
    trunc = TruncationPolicy(model.left_boundary[0] + 12, eng.plan.D + 2)
    n = 20_000
    chains = eng.sample_many(n, seed=31)
    marg = column_marginals(model, trunc=trunc)
    for mcol in range(eng.plan.seam_col, model.r + 2):
        exact = marg[mcol]
        mean_exact = float(sum(p * sum(lam) for lam, p in exact.entries.items()))
        sizes = chains[:, mcol - eng.plan.seam_col, :].sum(axis=1)
        mean_emp = float(np.mean(sizes))
        sd = float(np.std(sizes)) / math.sqrt(n) + 1e-9
        assert abs(mean_emp - mean_exact) < 5 * sd + 1e-6, (mcol, mean_emp, mean_exact)


def test_structured_pure_model_against_exact():
    # empty boundary member: seam is trivial, whole suffix sampled
    model, info = pure_reference_model(n_lminus=4, k=1)
    assert is_structured(model)
    eng = make_engine(model, backend=BACKEND)
    trunc = TruncationPolicy(18, 4)
    mcol = info["measure_col"]
    exact = boundary_schur_process(model, mcol, trunc=trunc)
    n = 8_000
    chains = eng.sample_many(n, seed=3)
    emp = _column_counts(chains, mcol - eng.plan.seam_col)
    for lam, p in exact.entries.items():
        pf = float(p)
        if pf > 0.02:
            c = emp.get(lam, 0) / n
            assert abs(c - pf) < 5 * math.sqrt(pf * (1 - pf) / n) + 1e-9


def test_structured_seam_boundary_containment():
    model, info = tiny_ladder(k=1, n_lminus=6, plus_columns=2)
    eng = make_engine(model, backend=BACKEND)
    chains = eng.sample_many(200, seed=17)
    for srow in chains:
        mu = tuple(int(v) for v in srow[0] if v)
        assert len(mu) <= eng.plan.D
        for v in mu:
            assert 0 < v <= model.left_boundary[0]


def test_sample_chains_threaded_deterministic():
    model, _info = tiny_ladder()
    a = fastsamp.sample_chains(model, 64, seed=7, threads=1, backend=BACKEND)
    b = fastsamp.sample_chains(model, 64, seed=7, threads=1, backend=BACKEND)
    assert np.array_equal(a, b)
