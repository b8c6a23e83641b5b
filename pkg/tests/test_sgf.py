from fractions import Fraction

import pytest

from raildimer.model import RailYardModel
from raildimer import sgf
from raildimer.sgf import (
    WeightClasses, PiecewiseBoundary, class_assignment,
    sgf_value, sgf_by_measure, sgf_points,
    OperatorSpec, difference_operator_moments, difference_operator_moment,
    exact_block_moment, exact_full_moment, factor_submeasures, dominance_gap,
)

F = Fraction


def one_class_model():
    # two (L,+) then two (L,-) with equal weights: n = 1
    return RailYardModel(0, 3, "LLLL", "++--",
                         [F(1, 3), F(1, 4), F(1, 2), F(1, 2)])


def two_class_model(ratio=8, boundary=(4, 1)):
    # boundary blocks (4, 1) split one column per class
    hi = F(1, 2)
    lo = hi / ratio
    return RailYardModel(0, 3, "LLLL", "+-+-",
                         [F(1, 3), hi, F(1, 4), lo],
                         left_boundary=boundary)


def test_weight_classes_structure():
    m = two_class_model()
    wc = WeightClasses(m)
    assert wc.n == 2
    assert wc.values == (F(1, 2), F(1, 16))
    assert wc.classes == ((1,), (3,))
    assert wc.sigma0 == (1, 3)
    assert wc.class_partition(1) == (4,)
    assert wc.class_partition(2) == (1,)
    assert wc.sizes_beyond(0) == (1, 1)
    assert wc.block_offset(2, 0) == 1


def test_piecewise_boundary_segments():
    pb = PiecewiseBoundary((5, 5, 2, 2, 2), 5)
    assert pb.values == (5, 2)
    assert pb.block_sizes == (2, 3)
    assert pb.K == (3, 2)
    # omega = (2-5, 2-4, 2-3, 5-2, 5-1) = (-3, -2, -1, 3, 4)
    assert pb.A == (-3, 3)
    assert pb.B == (-1, 4)
    assert sum(b - a for a, b in zip(pb.a, pb.b)) == 1


def test_class_assignment():
    m = two_class_model()
    wc = WeightClasses(m)
    pb = PiecewiseBoundary(m.left_boundary, 2)
    assert class_assignment(pb, wc) == ((0,), (1,))
    with pytest.raises(ValueError):
        class_assignment(PiecewiseBoundary((3, 3), 2), wc)


def test_sgf_value_normalization_and_oracle():
    from raildimer.fock import TruncationPolicy
    m = one_class_model()
    wide = TruncationPolicy(40, 4)
    for t in (1, 2):
        ucols, _ = sgf_points(m, t)
        u_at_x = {i: m.weight(i) for i in ucols}
        assert sgf_value(m, t, u_at_x) == 1
        u = {i: m.weight(i) + F(1, 7) for i in ucols}
        lhs = float(sgf_value(m, t, u))
        rhs = float(sgf_by_measure(m, t, u, trunc=wide))
        # the measure-side oracle is truncated; the geometric tail is ~ (1/3)^40
        assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_sgf_value_oracle_with_boundary():
    from raildimer.fock import TruncationPolicy
    m = RailYardModel(0, 2, "LLL", "-+-", [F(1, 2), F(1, 3), F(1, 2)],
                      left_boundary=(2, 1))
    t = 1
    ucols, _ = sgf_points(m, t)
    u = {i: F(2, 5) for i in ucols}
    lhs = float(sgf_value(m, t, u))
    rhs = float(sgf_by_measure(m, t, u, trunc=TruncationPolicy(45, 4)))
    assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_sgf_symmetry_within_class():
    m = RailYardModel(0, 3, "LLLL", "+---",
                      [F(1, 3), F(1, 2), F(1, 2), F(1, 2)])
    t = 1
    ucols, _ = sgf_points(m, t)
    assert len(ucols) == 2
    u1 = {ucols[0]: F(1, 5), ucols[1]: F(3, 7)}
    u2 = {ucols[0]: F(3, 7), ucols[1]: F(1, 5)}
    assert sgf_value(m, t, u1) == sgf_value(m, t, u2)


def test_zeroth_moment_counts_class_size():
    m = two_class_model()
    t = 0
    for h in (1, 2):
        val, _ = difference_operator_moments(m, t, [OperatorSpec(0, h=h)])
        # k = 0 returns the class size (each coordinate contributes 1)
        assert val == pytest.approx(1.0, abs=1e-6)


def test_single_class_moments_match_exact_measure():
    m = one_class_model()
    t = 1
    for k in (1, 2):
        val, err = difference_operator_moments(m, t, [OperatorSpec(k)])
        oracle = float(exact_full_moment(m, t, k))
        assert err < 1e-5
        assert val == pytest.approx(oracle, rel=1e-5)


def test_single_class_second_power():
    m = one_class_model()
    t = 1
    val, _ = difference_operator_moments(m, t, [OperatorSpec(1, power=2)])
    oracle = float(exact_full_moment(m, t, 1, power=2))
    assert val == pytest.approx(oracle, rel=1e-5)


def test_class_operator_additivity():
    m = two_class_model()
    t = 0
    for k in (1, 2):
        total, _ = difference_operator_moments(m, t, [OperatorSpec(k)])
        parts = [difference_operator_moments(m, t, [OperatorSpec(k, h=h)])[0]
                 for h in (1, 2)]
        assert total == pytest.approx(sum(parts), rel=1e-5)
        oracle = float(exact_full_moment(m, t, k))
        assert total == pytest.approx(oracle, rel=1e-5)


def test_class_moment_approximates_block_moment():
    # agreement with the block oracle improves as the weight ratio grows
    t = 0
    errs = []
    for ratio in (4, 64):
        m = two_class_model(ratio=ratio, boundary=(6, 1))
        val = difference_operator_moment(m, t, h=1, k=1)
        oracle = float(exact_block_moment(m, t, 1, 1))
        errs.append(abs(val - oracle) / abs(oracle))
    assert errs[1] < errs[0]
    assert errs[1] < 1e-2


def test_factor_submeasures_trivial_single_class():
    m = one_class_model()
    subs = factor_submeasures(m, 2)
    assert len(subs) == 1
    sub, meas = subs[0]
    assert sub.weights == m.weights
    assert sub.lr_seq == m.lr_seq
    assert abs(float(meas.total_mass()) - 1.0) < 1e-12


def test_factor_submeasures_two_class_structure():
    m = two_class_model()
    subs = factor_submeasures(m, 0)
    assert len(subs) == 2
    sub1, _ = subs[0]
    sub2, meas2 = subs[1]
    # class-1 model keeps non-(L,-) columns, zeroes the class-2 weight
    assert sub1.weight(1) == m.weight(1) and sub1.weight(3) == 0
    assert sub1.weight(0) == m.weight(0)
    # class-2 model is all-L with only its own weight alive
    assert set(sub2.lr_seq) == {"L"}
    assert sub2.weight(3) == m.weight(3)
    assert sub2.weight(0) == 0 and sub2.weight(1) == 0
    assert sub2.left_boundary == (1,)
    # all class-(>=2) chains stay below the boundary first part
    for lam in meas2.entries:
        assert (lam[0] if lam else 0) <= m.left_boundary[0]


def test_factorization_total_variation_shrinks_with_ratio():
    from raildimer.fock import boundary_schur_process
    t = 0
    tvs = []
    for ratio in (2, 16):
        m = two_class_model(ratio=ratio, boundary=(4, 1))
        wc = WeightClasses(m)
        joint = boundary_schur_process(m, t + 1)
        subs = factor_submeasures(m, t)
        sizes = wc.sizes_beyond(t)
        tv = F(0)
        for lam, p in joint.entries.items():
            blocks = []
            lo = 0
            for h in (1, 2):
                blocks.append(tuple(x for x in
                                    (lam + (0,) * 8)[lo:lo + sizes[h - 1]] if x))
                lo += sizes[h - 1]
            q = subs[0][1][blocks[0]] * subs[1][1][blocks[1]]
            tv += abs(p - q)
        tvs.append(float(tv) / 2)
    assert tvs[1] < tvs[0]


def test_dominance_gap_monotone():
    import math
    gaps = []
    for ratio in (2, 4, 8, 16):
        m = two_class_model(ratio=ratio, boundary=(5, 2))
        gaps.append(dominance_gap(m))
    assert all(b > a for a, b in zip(gaps, gaps[1:]))
    m1 = one_class_model()
    assert dominance_gap(m1) == math.inf
