from fractions import Fraction

import pytest

from raildimer import partitions as pt


def test_normalize_strips_trailing_zeros():
    assert pt.normalize((3, 1, 1, 0, 0)) == (3, 1, 1)
    assert pt.normalize(()) == ()
    with pytest.raises(ValueError):
        pt.normalize((1, 2))


def test_interlaces_examples():
    # mu=(2), lam=(3,1,1): needs 1 >= 0 >= 1, fails
    assert not pt.interlaces((2,), (3, 1, 1))
    for k in range(5):
        assert pt.interlaces((), (k,) if k else ())
    assert pt.interlaces((2, 1), (3, 1))


def test_interlaces_conjugate_examples():
    assert pt.interlaces_conjugate((2,), (3, 1, 1))
    assert pt.interlaces_conjugate((2, 1), (2, 1))
    assert not pt.interlaces_conjugate((1,), (3,))


def test_conjugate_examples():
    assert pt.conjugate((3, 1, 1)) == (3, 1, 1)
    assert pt.conjugate(()) == ()
    assert pt.conjugate((4,)) == (1, 1, 1, 1)


def test_conjugate_involution_exhaustive():
    for lam in pt.partitions_up_to_size(12):
        assert pt.conjugate(pt.conjugate(lam)) == lam


def test_interlacing_cross_checks_exhaustive():
    lams = list(pt.partitions_up_to_size(8))
    for lam in lams:
        for mu in lams:
            horiz = all(
                pt.part(lam, i) >= pt.part(mu, i) >= pt.part(lam, i + 1)
                for i in range(1, max(len(lam), len(mu)) + 1)
            )
            assert pt.interlaces(mu, lam) == horiz
            vert = all(
                0 <= pt.part(lam, i) - pt.part(mu, i) <= 1
                for i in range(1, max(len(lam), len(mu)) + 1)
            )
            byconj = pt.interlaces(pt.conjugate(mu), pt.conjugate(lam))
            assert pt.interlaces_conjugate(mu, lam) == vert == byconj


def test_shifted_coordinates():
    assert pt.shifted_coordinates((), 3) == (2, 1, 0)
    assert pt.shifted_coordinates((2, 1), 2) == (3, 1)
    assert pt.shifted_coordinates((3, 1, 1), 3) == (5, 2, 1)
    with pytest.raises(ValueError):
        pt.shifted_coordinates((1, 1, 1), 2)


def test_shifted_coordinates_properties():
    for lam in pt.partitions_up_to_size(9):
        N = len(lam) + 2
        coords = pt.shifted_coordinates(lam, N)
        assert all(a > b for a, b in zip(coords, coords[1:]))
        assert sum(coords) == pt.size(lam) + N * (N - 1) // 2


def test_counting_measure():
    cm = pt.counting_measure((), 2)
    assert cm.atoms == (Fraction(1, 2), Fraction(0))
    cm = pt.counting_measure((2, 2), 2)
    assert cm.atoms == (Fraction(3, 2), Fraction(1))
    N = 6
    stair = tuple(N - i for i in range(1, N + 1) if N - i > 0)
    cm = pt.counting_measure(stair, N)
    diffs = {a - b for a, b in zip(cm.atoms, cm.atoms[1:])}
    assert diffs == {Fraction(2, N)}


def test_partition_text_roundtrip():
    for lam in [(), (3, 1, 1), (5,)]:
        assert pt.parse_partition(pt.format_partition(lam)) == lam
    assert pt.format_partition(()) == "()"


def test_strip_enumerators_agree_with_predicates():
    for lam in pt.partitions_up_to_size(6):
        below = set(pt.horizontal_strips_below(lam))
        expect = {mu for mu in pt.partitions_in_box(6, 6) if pt.interlaces(mu, lam)}
        assert below == expect
        above = set(pt.horizontal_strips_above(lam, 7, 7))
        expect_up = {
            mu for mu in pt.partitions_in_box(7, 7) if pt.interlaces(lam, mu)
        }
        assert above == expect_up
        vbelow = set(pt.vertical_strips_below(lam))
        expect_v = {
            mu for mu in pt.partitions_in_box(6, 6) if pt.interlaces_conjugate(mu, lam)
        }
        assert vbelow == expect_v
