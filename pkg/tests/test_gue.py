import math
from fractions import Fraction

import numpy as np
import pytest

from raildimer import gue
from raildimer.model import RailYardModel
from raildimer.sgf import WeightClasses, PiecewiseBoundary

F = Fraction


def test_gue_1x1_is_standard_normal():
    ev = gue.sample_gue_spectra(1, 100_000, seed=7)[:, 0]
    assert abs(ev.mean()) < 4 / math.sqrt(100_000)
    assert 0.98 <= ev.var() <= 1.02


def test_gue_trace_centered():
    ev = gue.sample_gue_spectra(3, 50_000, seed=11)
    tr = ev.sum(axis=1)
    assert abs(tr.mean()) < 4 * tr.std() / math.sqrt(len(tr))


def test_gue_2x2_joint_density_chisquare():
    from scipy.stats import chi2
    ev = gue.sample_gue_spectra(2, 200_000, seed=13)
    lo, hi, nb = -2.8, 2.8, 10
    edges = np.linspace(lo, hi, nb + 1)
    # quadrature of the ordered density over the grid
    gx = np.linspace(lo, hi, 281)
    dens = np.zeros((nb, nb))
    for i in range(nb):
        for j in range(nb):
            xs = gx[(gx >= edges[i]) & (gx < edges[i + 1])]
            ys = gx[(gx >= edges[j]) & (gx < edges[j + 1])]
            if len(xs) == 0 or len(ys) == 0:
                continue
            xx, yy = np.meshgrid(xs, ys, indexing="ij")
            mask = xx > yy
            vals = (xx - yy) ** 2 * np.exp(-0.5 * (xx ** 2 + yy ** 2)) * mask
            dens[i, j] = vals.sum() * (gx[1] - gx[0]) ** 2
    dens /= dens.sum()
    counts = np.histogram2d(ev[:, 0], ev[:, 1], bins=[edges, edges])[0]
    inside = counts.sum()
    keep = dens * inside > 8
    expected = dens * inside
    stat = ((counts[keep] - expected[keep]) ** 2 / expected[keep]).sum()
    # mild excess over the in-window mass is absorbed into the dof estimate
    dof = int(keep.sum()) - 1
    p = 1 - chi2.cdf(stat * counts.sum() / expected[keep].sum(), dof)
    assert p > 0.001, (stat, dof, p)


def test_hciz_n1_exact():
    rep = gue.hciz_check((2,), 1, [0.7], mc_samples=100, seed=1)
    assert rep["mc"] == pytest.approx(rep["exact"], rel=1e-12)


def test_hciz_small_cases():
    rep = gue.hciz_check((1,), 2, [0.3, -0.2], mc_samples=200_000, seed=5)
    assert abs(rep["z"]) < 3, rep
    rep = gue.hciz_check((), 3, [0.2, 0.0, -0.4], mc_samples=50_000, seed=6)
    assert rep["exact"] == pytest.approx(1.0)
    assert abs(rep["z"]) < 3, rep


def test_hciz_degenerate_points_perturbed():
    rep = gue.hciz_check((1,), 2, [0.3, 0.3], mc_samples=10_000, seed=3)
    assert rep["perturbed"]


def two_class_model(ratio=8):
    hi = F(1, 2)
    lo = hi / ratio
    return RailYardModel(0, 3, "LLLL", "+-+-",
                         [F(1, 3), hi, F(1, 4), lo],
                         left_boundary=(4, 1))


def test_limit_bands_single_block_uniform():
    # one rectangular block per class: each limit measure is width-1 uniform
    m = two_class_model()
    wc = WeightClasses(m)
    pb = PiecewiseBoundary(m.left_boundary, 2)
    for h in (1, 2):
        bands = gue.class_limit_bands(pb, wc, h)
        assert bands.total_length() == 1
        psi1, psi2 = gue.limit_measure_moments(pb, wc, h, mode="limit")
        a = bands.bands[0][0]
        assert psi1 == a + F(1, 2)
        assert psi2 - psi1 ** 2 == F(1, 12)


def test_limit_vs_finite_moments_converge():
    # empty boundary: finite staircase moments approach (1/2, 1/3)
    errs = []
    for N in (8, 32):
        m = RailYardModel(0, N - 1, "L" * N, "-" * N, [F(1, 2)] * N)
        wc = WeightClasses(m)
        psi1, psi2 = gue.limit_measure_moments(None, wc, 1, mode="finite")
        errs.append(abs(float(psi1 - F(1, 2))) + abs(float(psi2 - F(1, 3))))
    assert errs[1] < errs[0]
    assert errs[1] < 0.1


def test_band_width_identity_random_data():
    # gamma - beta = (b_j - a_j)/theta for the matched boundary segment
    import random
    rng = random.Random(99)
    for _ in range(20):
        sizes = [rng.randint(1, 4) for _ in range(rng.randint(1, 3))]
        vals = sorted(rng.sample(range(0, 40), len(sizes)), reverse=True)
        lam = []
        for v, c in zip(vals, sizes):
            lam += [v] * c
        N = len(lam)
        cols = "L" * N
        weights = [F(1, 2 ** (i + 1)) for i in range(len(sizes))]
        w = []
        for wi, c in zip(weights, sizes):
            w += [wi] * c
        m = RailYardModel(0, N - 1, cols, "-" * N, w, left_boundary=lam)
        wc = WeightClasses(m)
        pb = PiecewiseBoundary(m.left_boundary, N)
        from raildimer.sgf import class_assignment
        assign = class_assignment(pb, wc)
        for h in range(1, wc.n + 1):
            theta = F(wc.class_size(h), N)
            bands = gue.class_limit_bands(pb, wc, h)
            widths = sorted(b - a for a, b in bands.bands)
            expect = sorted((pb.b[pb.s - 1 - t] - pb.a[pb.s - 1 - t]) / theta
                            for t in assign[h - 1])
            assert widths == expect
            assert bands.total_length() == 1


def test_rescaling_constants_h2_empty_boundary():
    m = two_class_model()
    c = gue.rescaling_constants(m, 0, 2, (F(1, 2), F(1, 3)))
    assert c.A == 0 and c.B == F(1, 12)


def test_rescaling_constants_h1_no_plus_columns():
    m = RailYardModel(0, 1, "LL", "--", [F(1, 2), F(1, 4)])
    c = gue.rescaling_constants(m, 0, 1, (F(1, 2), F(5, 12)))
    assert c.A == 0
    assert c.B == F(5, 12) - F(1, 4) - F(1, 12)


def test_rescaling_constants_h1_channel_sums():
    m = two_class_model()
    # both plus columns (letters L) lie before t=3; x* = 1/2
    c = gue.rescaling_constants(m, 3, 1, (F(1, 2), F(1, 3)))
    y0, y2 = F(1, 3) * F(1, 2), F(1, 4) * F(1, 2)
    assert c.A == y0 / (1 - y0) + y2 / (1 - y2)
    assert c.B == y0 / (1 - y0) ** 2 + y2 / (1 - y2) ** 2
    assert c.A > 0 and c.B > 0


def test_gue_compare_self_consistency():
    # feed rescaled synthetic data that is exactly GUE_k: KS should be small
    k, n = 3, 30_000
    n_class = 16
    A, B = F(1, 4), F(9, 16)   # sqrt(B) = 3/4
    ev = gue.sample_gue_spectra(k, n, seed=21)
    q = (ev * math.sqrt(float(B)) + math.sqrt(n_class) * float(A)) * math.sqrt(n_class)
    block = q - (k - np.arange(1, k + 1))[None, :]
    const = gue.RescalingConstants(2, A, B, F(1, 2), F(1, 3))
    rep = gue.gue_compare(block, n_class, k, const, reference_n=100_000)
    assert max(rep.ks_sqrtB) < 0.02
    assert rep.best() == "sqrtB"
    # a wrong-sign A shifts every mean by about 2 sqrt(n) A / sqrt(B)
    const_bad = gue.RescalingConstants(2, -A, B, F(1, 2), F(1, 3))
    _bB, b_sB = gue.rescaled_block_coordinates(block, n_class, k, const_bad)
    shift = 2 * math.sqrt(n_class) * float(A) / math.sqrt(float(B))
    _bB2, b_ok = gue.rescaled_block_coordinates(block, n_class, k, const)
    assert np.allclose(b_sB.mean(axis=0) - b_ok.mean(axis=0), shift, rtol=1e-9)


def test_ks_distance_basic():
    x = np.linspace(0, 1, 1000)
    y = np.sort(np.linspace(0, 1, 2000))
    assert gue.ks_distance(x, y) < 0.01
    assert gue.ks_distance(x + 5.0, y) == 1.0
