from fractions import Fraction

import pytest

from raildimer.model import (
    RailYardModel, DimerSample, HypothesisError,
    partition_function, product_formula, enumerate_coverings,
    enumeration_marginal, sample_weight, covering_probability, charge,
    ParticleHoleColumn,
)
from raildimer.fock import DivergenceError, boundary_schur_process
from raildimer.symfunc import schur

F = Fraction


def figure2_model(x=None):
    x = x or [F(1, 2)] * 4
    return RailYardModel(1, 4, "LRRL", "++--", x)


def test_single_trivial_column():
    m = RailYardModel(0, 0, "L", "+", [F(1, 2)])
    assert partition_function(m) == 1


def test_figure2_partition_function_closed_form():
    x = [F(1, 2), F(1, 3), F(1, 5), F(1, 7)]
    m = figure2_model(x)
    expect = (1 + x[0] * x[2]) * (1 / (1 - x[0] * x[3])) * \
        (1 / (1 - x[1] * x[2])) * (1 + x[1] * x[3])
    assert partition_function(m) == expect
    assert product_formula(m) == expect


def test_nonzero_left_boundary_needs_lminus():
    m = RailYardModel(1, 2, "LL", "++", [F(1, 2), F(1, 3)],
                      left_boundary=(1,))
    # no (L,-) column can absorb the boundary: the partition function is 0
    assert partition_function(m) == 0
    assert product_formula(m) == 0


def test_single_lminus_boundary_peel():
    x = F(2, 7)
    m = RailYardModel(0, 0, "L", "-", [x], left_boundary=(3,))
    # only chain: (3) -> (); weight x^3
    assert partition_function(m) == x ** 3
    assert product_formula(m) == x ** 3


def test_divergent_weights_flagged():
    m = RailYardModel(1, 2, "LL", "+-", [F(3, 2), F(2, 3)])
    with pytest.raises(DivergenceError):
        partition_function(m)


def test_product_formula_hypothesis_violation():
    m = RailYardModel(1, 2, "RL", "--", [F(1, 2), F(1, 3)],
                      left_boundary=(1,))
    with pytest.raises(HypothesisError):
        product_formula(m)
    m2 = RailYardModel(1, 1, "L", "-", [F(1, 2)], left_boundary=(1,),
                       right_boundary=(1,))
    with pytest.raises(HypothesisError):
        product_formula(m2)


def test_product_formula_mirrored_branch():
    # all columns != (L,-): conjugate boundary against (R,-) points
    x = [F(1, 2), F(1, 3)]
    m = RailYardModel(1, 2, "LR", "+-", x, left_boundary=(1, 1))
    expect = schur((2,), (x[1],)) * (1 + x[0] * x[1])
    assert product_formula(m) == expect
    assert partition_function(m) == expect


def test_partition_function_equals_product_formula_randomized():
    import random
    rng = random.Random(20240817)
    weights_pool = [F(1, 5), F(2, 5), F(3, 5), F(4, 5)]
    boundaries = [(), (1,), (2,), (2, 1), (3, 2, 1), (2, 2)]
    checked = 0
    for _ in range(60):
        n = rng.randint(1, 5)
        lr, sg, ws = [], [], []
        for _c in range(n):
            kind = rng.choice(["L+", "L-", "R+"])
            lr.append(kind[0])
            sg.append(kind[1])
            ws.append(rng.choice(weights_pool))
        lam = rng.choice(boundaries)
        m = RailYardModel(0, n - 1, "".join(lr), "".join(sg), ws,
                          left_boundary=lam)
        assert partition_function(m) == product_formula(m)
        checked += 1
    assert checked == 60


def test_enumeration_matches_partition_function_finite_support():
    # minus columns first: finite support, enumeration is exact
    x = [F(1, 2), F(1, 3), F(1, 4)]
    m = RailYardModel(0, 2, "LLL", "--+", x, left_boundary=(2, 1))
    samples, stabilized = enumerate_coverings(m, cap=8)
    assert stabilized
    total = sum(w for _s, w in samples)
    assert total == partition_function(m)


def test_enumeration_truncated_geometric_channel():
    # (L,-)(L,+) with empty boundaries: single geometric channel
    x1, x2 = F(1, 3), F(1, 2)
    m = RailYardModel(0, 1, "LL", "+-", [x1, x2])
    samples, stabilized = enumerate_coverings(m, cap=9)
    assert not stabilized  # geometric support is infinite
    total = sum(w for _s, w in samples)
    partial = sum((x1 * x2) ** k for k in range(10))
    assert total == partial
    assert abs(float(total - partition_function(m))) < float((x1 * x2) ** 9)


def test_figure2_enumeration_close_at_cap():
    m = figure2_model()
    samples, stabilized = enumerate_coverings(m, cap=6)
    total = sum(w for _s, w in samples)
    z = partition_function(m)
    assert total <= z
    assert float(z - total) < 1e-3 * float(z)


def test_figure2_chain_weight():
    m = figure2_model()
    chain = [(), (2,), (3, 1, 1), (2,), ()]
    s = DimerSample(chain, start_column=1)
    s.validate(m)
    assert s.diag_counts() == (2, 3, 3, 2)
    x = F(1, 2)
    assert sample_weight(s, m) == x ** 10
    p = covering_probability(s, m)
    assert 0 < p < 1


def test_boundary_schur_process_matches_enumeration():
    x = [F(1, 2), F(1, 3), F(1, 4)]
    m = RailYardModel(0, 2, "LLL", "--+", x, left_boundary=(2, 1))
    for t in range(0, 4):
        mine = boundary_schur_process(m, t)
        oracle = enumeration_marginal(m, t, cap=8)
        assert oracle.stabilized
        assert mine.entries == oracle.entries


def test_boundary_schur_process_endpoints():
    m = figure2_model()
    left = boundary_schur_process(m, m.l)
    assert left.entries == {(): F(1)}
    # all weights 0: forced equalities all along (boundaries must agree)
    m0 = RailYardModel(0, 2, "LLL", "-+-", [F(0)] * 3,
                       left_boundary=(2, 1), right_boundary=(2, 1))
    for t in range(0, 4):
        assert boundary_schur_process(m0, t).entries == {(2, 1): F(1)}


def test_charge_zero_and_shifted():
    m = figure2_model()
    s = DimerSample([(), (2,), (3, 1, 1), (2,), ()], start_column=1)
    values = {charge(s, t) for t in range(1, 6)}
    assert values == {0}
    assert ParticleHoleColumn((), shift=1).charge() == 1
    assert ParticleHoleColumn((3, 1), shift=-1).charge() == -1


def test_model_roundtrip(tmp_path):
    m = figure2_model([F(1, 2), F(1, 3), F(1, 5), F(1, 7)])
    path = tmp_path / "model.json"
    m.save(path)
    m2 = RailYardModel.load(path)
    assert m2.to_dict() == m.to_dict()
