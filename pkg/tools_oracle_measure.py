"""Exact 1-point occupancy of the measure-column ensemble (validation tool).

The forward factor collapses by Cauchy-Binet to a single convolution kernel;
the ensemble is biorthogonal, so the occupancy profile is the diagonal of
B (G B)^{-1} G in exact rational arithmetic.
"""

from fractions import Fraction as F
from collections import Counter
from math import factorial, lcm

from raildimer.fastsamp import StructuredPlan
from raildimer.fastsamp.plan import _complement_rows_exact
from raildimer.partitions import part


def _htable(points, rmax):
    h = [F(0)] * (rmax + 1)
    h[0] = F(1)
    for x in points:
        x = F(x)
        for r in range(1, rmax + 1):
            h[r] += x * h[r - 1]
    return h


def _binom(w, j):
    if w < j:
        return 0
    out = 1
    for t in range(j):
        out *= (w - t)
    return out // factorial(j)


def measure_column_occupancy(model, plan=None):
    """Exact site-occupancy profile at the column right after the plus block.

    Returns (sites, rho) with rho exact Fractions summing to D.
    """
    plan = plan or StructuredPlan(model)
    lam = model.left_boundary
    nd, D = plan.n_det, plan.D
    bulk = [model.weight(i) for i in plan.bulk_cols]
    plus = [model.weight(i) for i in model.columns() if model.sign(i) == "+"]
    a = [part(lam, i) + nd - i for i in range(1, nd + 1)]
    site_lo, site_hi = plan.site_lo, plan.site_hi
    rmax = max(a) if a else 0
    Hb = _htable(bulk, rmax)
    Hy = _htable(plus, site_hi + 1)

    def hb(r):
        return Hb[r] if 0 <= r <= rmax else F(0)

    def hy(r):
        return Hy[r] if 0 <= r <= site_hi else F(0)

    def comp_entry(ai, wp):
        return sum(hb(ai - u) * hy(wp - u) for u in range(0, min(ai, wp) + 1))

    sites = list(range(site_lo, site_hi + 1))
    comp = [[comp_entry(a[i], wp) for wp in sites] for i in range(nd)]
    pinned = list(range(nd - D - 1, -1, -1))
    pin = [[comp_entry(a[i], wp) for wp in pinned] for i in range(nd)]

    def int_cols(mat):
        scales = []
        n, m = len(mat), len(mat[0])
        out = [[None] * m for _ in range(n)]
        for j in range(m):
            den = 1
            for i in range(n):
                den = lcm(den, mat[i][j].denominator)
            scales.append(den)
            for i in range(n):
                v = mat[i][j]
                out[i][j] = v.numerator * (den // v.denominator)
        return out, scales

    comp_int, comp_scale = int_cols(comp)
    pin_int, _ = int_cols(pin)
    G2 = _complement_rows_exact(pin_int, comp_int)

    ms = plan.tail_multiset
    cnt = Counter(F(x) for x in ms)
    off = nd - D
    B2 = []
    for idx, w in enumerate(sites):
        ww = w - off
        row = [F(_binom(ww, j)) * c ** (ww - j) if ww >= j else F(0)
               for c in sorted(cnt, reverse=True) for j in range(cnt[c])]
        # compensate the per-site integer scaling of the G columns
        B2.append([x / comp_scale[idx] for x in row])

    V = len(sites)
    GB = [[sum(F(G2[k][v]) * B2[v][m] for v in range(V)) for m in range(D)]
          for k in range(D)]
    M = [row[:] + [F(1) if i == j else F(0) for j in range(D)]
         for i, row in enumerate(GB)]
    for col in range(D):
        piv = next(i for i in range(col, D) if M[i][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [x / pv for x in M[col]]
        for i in range(D):
            if i != col and M[i][col] != 0:
                fct = M[i][col]
                M[i] = [xi - fct * xc for xi, xc in zip(M[i], M[col])]
    Inv = [row[D:] for row in M]
    rho = []
    for v in range(V):
        gv = [F(G2[k][v]) for k in range(D)]
        bv = B2[v]
        rho.append(sum(bv[m] * Inv[m][k] * gv[k]
                       for m in range(D) for k in range(D)))
    return sites, rho


if __name__ == "__main__":
    import sys
    import numpy as np
    from raildimer.experiments import ladder_model

    N = int(sys.argv[1]) if len(sys.argv) > 1 else 24
    model, info = ladder_model(N)
    sites, rho = measure_column_occupancy(model)
    rho_f = np.array([float(r) for r in rho])
    w = np.array(sites)
    print("N=%d total=%.12f  E[sum w]=%.6f" % (N, rho_f.sum(), (rho_f * w).sum()))
    np.save("/tmp/rho_%d.npy" % N, np.vstack([w, rho_f]))
