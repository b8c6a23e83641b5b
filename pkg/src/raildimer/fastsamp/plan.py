"""Precomputation for the structured chain sampler.

Applies to all-L models shaped [minus bulk][mixed plus/minus suffix] with an
empty right boundary and a small suffix minus count D.  The partition at the
bulk/suffix seam has at most D rows; its law is a biorthogonal determinantal
measure built from the skew boundary factor (bulk side) and the confluent
suffix basis (tail side).  Forward steps through the suffix are single-sided
determinantal conditionals over interlacing boxes.

Sites are the shifted coordinates w = mu_j + n_det - j; tables are scaled
row- and site-wise (legal: uniform factors per det) to stay in float range.
"""

import math
from fractions import Fraction
from math import lcm

import numpy as np

from ..partitions import part, length


def _homog_table_int(points, rmax):
    """Scaled complete homogeneous values: H[r] = h_r(points) * den^r in Z."""
    den = lcm(*[Fraction(x).denominator for x in points]) if points else 1
    h = [0] * (rmax + 1)
    h[0] = 1
    for x in points:
        x = Fraction(x)
        mult = x.numerator * (den // x.denominator)
        for r in range(1, rmax + 1):
            h[r] = h[r] + mult * h[r - 1]
    return h, den


def _ld_scaled(ints):
    """Big-integer row to longdouble, scaled by a common power of two.

    The discarded scale is a uniform per-row determinant factor.
    """
    ints = [int(v) for v in ints]
    out = np.zeros(len(ints), dtype=np.longdouble)
    top = max((abs(v).bit_length() for v in ints), default=0)
    shift = max(top - 64, 0)
    for i, v in enumerate(ints):
        out[i] = np.longdouble(v >> shift if shift else v)
    return out


try:
    from gmpy2 import mpz as _mpz
except ImportError:                      # pure-python integers still work
    def _mpz(x):
        return x


def _complement_rows_exact(Fint, Cint):
    """Exact fraction-free elimination of the pinned columns.

    Fint: n x f pivot columns, Cint: n x V site columns (big integers).
    Returns the D = n - f un-pivoted rows of the reduced site columns: their
    D x D minors are proportional (a fixed constant) to det([C_set | F]).
    """
    n = len(Fint)
    f = len(Fint[0]) if n else 0
    aug = [[_mpz(v) for v in Fint[i]] + [_mpz(v) for v in Cint[i]]
           for i in range(n)]
    used = [False] * n
    prev = _mpz(1)
    for col in range(f):
        pr = None
        for i in range(n):
            if not used[i] and aug[i][col] != 0:
                pr = i
                break
        if pr is None:
            raise ArithmeticError("pinned columns are rank deficient")
        used[pr] = True
        piv = aug[pr][col]
        width = len(aug[0])
        rowp = aug[pr]
        for i in range(n):
            if used[i] or i == pr:
                continue
            rowi = aug[i]
            fi = rowi[col]
            for j in range(col + 1, width):
                rowi[j] = (rowi[j] * piv - fi * rowp[j]) // prev
            rowi[col] = 0
        prev = piv
    return [aug[i][f:] for i in range(n) if not used[i]]


def confluent_basis(values_mults, w):
    """Columns of the repeated-point alternant basis at integer sites w.

    For a value c with multiplicity d the columns are C(w, j) c^(w-j),
    j = 0..d-1, in extended precision.
    """
    w = np.asarray(w, dtype=np.longdouble)
    cols = []
    for c, d in values_mults:
        c = np.longdouble(float(c))
        for j in range(d):
            if c > 0:
                with np.errstate(over="ignore"):
                    col = _binom(w, j) * np.power(c, np.maximum(w - j, 0.0))
            else:
                col = (w == j).astype(np.longdouble)
            cols.append(col)
    if cols:
        return np.column_stack(cols)
    return np.zeros((len(w), 0), dtype=np.longdouble)


def _binom(w, j):
    out = np.ones_like(w)
    for i in range(j):
        out = out * (w - i) / (i + 1)
    return np.where(w >= j, out, np.longdouble(0.0))


class StructuredPlan:
    """Shared read-only tables for sampling one model's suffix chains."""

    MAX_D = 12

    def __init__(self, model, slack=48):
        self.model = model
        cols = list(model.columns())
        if model.right_boundary != ():
            raise ValueError("structured sampler needs an empty right boundary")
        if any(model.letter(i) == "R" for i in cols):
            raise ValueError("structured sampler covers all-L models")
        plus_cols = [i for i in cols if model.sign(i) == "+"]
        if not plus_cols:
            raise ValueError("use the pure peel path: no plus columns")
        m0 = plus_cols[0]
        if any(model.sign(i) == "+" for i in cols if i < m0):
            raise ValueError("bulk prefix must be all minus")
        self.seam_col = m0
        self.suffix_cols = [i for i in cols if i >= m0]
        self.suffix = [(model.sign(i), float(model.weight(i)), i)
                       for i in self.suffix_cols]
        minus_suffix = [i for i in self.suffix_cols if model.sign(i) == "-"]
        self.D = len(minus_suffix)
        if self.D == 0:
            raise ValueError("suffix needs at least one minus column")
        if self.D > self.MAX_D:
            raise ValueError("suffix minus count %d too large" % self.D)
        lam = model.left_boundary
        self.bulk_cols = [i for i in cols if i < m0]
        if length(lam) - len(self.bulk_cols) > self.D:
            raise ValueError("boundary cannot be peeled below the suffix budget")
        for i in self.bulk_cols:
            if model.weight(i) <= 0:
                raise ValueError("bulk weights must be positive")
        model.check_convergence()

        self.cap_value = (lam[0] if lam else 0) + slack
        self.n_det = max(length(lam), self.D)
        nd, D = self.n_det, self.D
        # hard support floor: s_{lam/mu}(bulk) forces mu_j >= lam_{j + #bulk},
        # so no admissible site lies below min_j (lam_{j+B} + nd - j)
        nb = len(self.bulk_cols)
        floor = nd - D
        if lam:
            floor = max(floor, min(part(lam, j + nb) + nd - j
                                   for j in range(1, D + 1)))
        self.site_lo = floor
        self.site_hi = self.cap_value + nd - 1
        self.V = self.site_hi - self.site_lo + 1
        sites = np.arange(self.site_lo, self.site_hi + 1)
        self.sites = sites

        # ---- seam G-side: skew boundary factor reduced to the D free columns
        # by exact integer elimination of the pinned (zero-row) columns.  The
        # integer h-table carries den^r; the per-site den^(-w) it induces is
        # compensated on the B-side below.
        bulk_pts = [model.weight(i) for i in self.bulk_cols]
        a = [part(lam, i) + nd - i for i in range(1, nd + 1)]
        rmax = max(a) if nd else 0
        hint, den = _homog_table_int(bulk_pts, max(rmax, 0))
        self._site_den = den

        def hrow(i, ws):
            ai = a[i]
            return [hint[ai - w] if 0 <= ai - w <= rmax else 0 for w in ws]

        if nd == 0:
            self.G = np.ones((0, self.V), dtype=np.longdouble)
            self.seam_trivial = True
        else:
            site_list = list(sites)
            Cint = [hrow(i, site_list) for i in range(nd)]
            if nd > D:
                # pinned sites w = nd-D-1 .. 0 in column order j = D+1..nd
                pinned = list(range(nd - D - 1, -1, -1))
                Fint = [hrow(i, pinned) for i in range(nd)]
                free_rows = _complement_rows_exact(Fint, Cint)
            else:
                free_rows = Cint
            self.G = np.vstack([_ld_scaled(row) for row in free_rows]) \
                if free_rows else np.ones((0, self.V), dtype=np.longdouble)
            self.seam_trivial = length(lam) == 0

        # ---- suffix bases: one table per remaining-minus multiset
        self.minus_after = []   # per suffix position: list of weights remaining strictly after
        rem = [float(model.weight(i)) for i in minus_suffix]
        consumed = 0
        for sign, _w, _i in self.suffix:
            if sign == "-":
                consumed += 1
            self.minus_after.append(tuple(rem[consumed:]))
        self.tail_multiset = tuple(rem)

        self.bases = {}
        for ms in set([self.tail_multiset] + self.minus_after):
            self.bases[ms] = self._basis_for(ms)

        # ---- seam correlation kernel, exact.  The biorthogonal two-band
        # masses span an exponential range that defeats floating determinant
        # scans, so the whole kernel K = B (G B)^{-1} G is materialized in
        # rational arithmetic once; its entries are correlation numbers of
        # order one and sampling reduces to sequential thinning on floats.
        if self.seam_trivial:
            self.Kseam = np.zeros((0, 0))
        else:
            self.Kseam = self._exact_seam_kernel(free_rows, sites, den)

    def _basis_for(self, multiset):
        vm = []
        for c in sorted(set(multiset), reverse=True):
            vm.append((c, multiset.count(c)))
        q = len(multiset)
        wmax = self.cap_value + max(q, 1)
        w = np.arange(0, wmax + 1)
        return confluent_basis(vm, w)      # (wmax+1) x q

    def _exact_basis_rows(self, multiset, wlist):
        """Exact rational alternant rows at the given (already shifted) sites."""
        from math import factorial

        def binom_int(w, j):
            if w < j:
                return 0
            out = 1
            for t in range(j):
                out *= (w - t)
            return out // factorial(j)

        vals = sorted({Fraction(c) for c in multiset}, reverse=True)
        mult = {c: multiset.count(c) for c in set(Fraction(x) for x in multiset)}
        rows = []
        for w in wlist:
            w = int(w)
            row = []
            for c in vals:
                for j in range(mult[c]):
                    row.append(Fraction(binom_int(w, j)) * c ** (w - j)
                               if w >= j else Fraction(0))
            rows.append(row)
        return rows

    def _exact_seam_kernel(self, free_rows, sites, den):
        """K = B (G B)^{-1} G over the seam sites, exact, returned as float."""
        try:
            from gmpy2 import mpq as Q
        except ImportError:
            Q = Fraction
        D = self.D
        V = self.V
        off = self.n_det - D
        G = [[Q(int(v)) for v in row] for row in free_rows]
        B = [[Q(x.numerator, x.denominator) for x in row]
             for row in self._exact_basis_rows(self.tail_multiset,
                                               [w - off for w in sites])]
        # compensate the den^(-w) that the integer h-table folded into G
        denq = Q(den)
        B = [[x * denq ** int(w) for x in row] for row, w in zip(B, sites)]
        GB = [[sum(G[k][v] * B[v][m] for v in range(V)) for m in range(D)]
              for k in range(D)]
        aug = [row[:] + [Q(int(i == j)) for j in range(D)]
               for i, row in enumerate(GB)]
        for col in range(D):
            piv = next((i for i in range(col, D) if aug[i][col] != 0), None)
            if piv is None:
                raise ArithmeticError("singular seam Gram matrix")
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [x / pv for x in aug[col]]
            for i in range(D):
                if i != col and aug[i][col] != 0:
                    f = aug[i][col]
                    aug[i] = [xi - f * xc for xi, xc in zip(aug[i], aug[col])]
        inv = [row[D:] for row in aug]
        # W = inv . G  (D x V), then K[v, w] = B[v] . W[:, w]
        W = [[sum(inv[k][m] * G[m][v] for m in range(D)) for v in range(V)]
             for k in range(D)]
        K = np.empty((V, V))
        for v in range(V):
            bv = B[v]
            for w in range(V):
                K[v, w] = float(sum(bv[k] * W[k][w] for k in range(D)))
        tr = float(np.trace(K))
        if abs(tr - D) > 1e-6:
            raise ArithmeticError("seam kernel trace %.6f != %d" % (tr, D))
        return K

    # convenience for the experiment drivers ---------------------------------
    def measure_column(self):
        """Column index right after the last plus column."""
        last_plus = max(i for s, _w, i in self.suffix if s == "+")
        return last_plus + 1
