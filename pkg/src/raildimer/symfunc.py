"""Exact evaluation of (skew) Schur functions at numeric points.

All exact arithmetic is carried by fractions.Fraction; the same code paths
accept floats for Monte Carlo work (the Jacobi-Trudi determinant then runs
a partially pivoted elimination instead of the fraction-free one).
"""

from fractions import Fraction
from math import lcm

from .partitions import (
    normalize, part, size, length, conjugate, contains, interlaces,
)


def _is_exact(x):
    return isinstance(x, (int, Fraction))


def complete_homogeneous(r, points):
    """h_r evaluated at the given points; h_0 = 1, h_r = 0 for r < 0."""
    if r < 0:
        return Fraction(0) if all(_is_exact(x) for x in points) else 0.0
    return homogeneous_table(points, r)[r]


def homogeneous_table(points, rmax):
    """h_0..h_rmax at the given points, by the one-point-at-a-time recurrence."""
    exact = all(_is_exact(x) for x in points)
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    h = [one] + [zero] * rmax
    for x in points:
        for r in range(1, rmax + 1):
            h[r] = h[r] + x * h[r - 1]
    return h


def det_bareiss(m):
    """Fraction-free Bareiss determinant; entries must be exact rationals."""
    n = len(m)
    if n == 0:
        return Fraction(1)
    # clear denominators row by row
    scale = Fraction(1)
    a = []
    for row in m:
        row = [Fraction(x) for x in row]
        d = lcm(*(f.denominator for f in row)) if row else 1
        scale /= d ** 1
        a.append([int(f * d) for f in row])
    prev = 1
    sign = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * scale * a[n - 1][n - 1]


def det_float(m):
    """Gaussian elimination with partial pivoting."""
    n = len(m)
    if n == 0:
        return 1.0
    a = [list(map(float, row)) for row in m]
    det = 1.0
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        if a[p][k] == 0.0:
            return 0.0
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k + 1, n):
                a[i][j] -= f * a[k][j]
    return det


def det(m):
    if all(_is_exact(x) for row in m for x in row):
        return det_bareiss(m)
    return det_float(m)


def skew_schur(lam, mu, points):
    """s_{lam/mu}(points) by the Jacobi-Trudi determinant det(h_{lam_i-mu_j-i+j})."""
    lam, mu = normalize(lam), normalize(mu)
    exact = all(_is_exact(x) for x in points)
    zero = Fraction(0) if exact else 0.0
    if not contains(mu, lam):
        return zero
    n = len(lam)
    if n == 0:
        return Fraction(1) if exact else 1.0
    rmax = lam[0] + n
    h = homogeneous_table(points, rmax)
    def hval(r):
        if r < 0:
            return zero
        return h[r]
    m = [[hval(part(lam, i) - part(mu, j) - i + j) for j in range(1, n + 1)]
         for i in range(1, n + 1)]
    return det(m)


def schur(lam, points):
    return skew_schur(lam, (), points)


def schur_principal(lam, N):
    """s_lam(1^N) via the Weyl dimension product."""
    lam = normalize(lam)
    if len(lam) > N:
        return Fraction(0)
    val = Fraction(1)
    for i in range(1, N + 1):
        for j in range(i + 1, N + 1):
            val *= Fraction(part(lam, i) - part(lam, j) + j - i, j - i)
    return val


class PointMultiset:
    """Pairwise-distinct values with positive multiplicities summing to N."""

    def __init__(self, values, multiplicities):
        values = tuple(Fraction(v) if _is_exact(v) else v for v in values)
        multiplicities = tuple(int(m) for m in multiplicities)
        if len(values) != len(set(values)):
            raise ValueError("values must be pairwise distinct")
        if len(values) != len(multiplicities) or any(m <= 0 for m in multiplicities):
            raise ValueError("need one positive multiplicity per value")
        self.values = values
        self.multiplicities = multiplicities

    @property
    def n(self):
        return len(self.values)

    @property
    def N(self):
        return sum(self.multiplicities)

    def expanded(self):
        """The length-N point list, one block per value."""
        out = []
        for v, m in zip(self.values, self.multiplicities):
            out.extend([v] * m)
        return tuple(out)

    def block_of(self, j):
        """0-based block index of 1-based expanded position j."""
        acc = 0
        for b, m in enumerate(self.multiplicities):
            acc += m
            if j <= acc:
                return b
        raise IndexError(j)


def eta_offsets(sigma, points):
    """eta_j = #{k > j : x_{sigma(k)} != x_{sigma(j)}}, for sigma a permutation of [N]."""
    N = points.N
    if sorted(sigma) != list(range(1, N + 1)):
        raise ValueError("sigma must be a permutation of 1..%d" % N)
    x = points.expanded()
    vals = [x[s - 1] for s in sigma]
    return tuple(sum(1 for k in range(j + 1, N) if vals[k] != vals[j])
                 for j in range(N))


def phi_partitions(lam, sigma, points):
    """The n partitions phi^(i,sigma): sorted {lam_j + eta_j : x_{sigma(j)} in block i}."""
    lam = normalize(lam)
    eta = eta_offsets(sigma, points)
    x = points.expanded()
    buckets = [[] for _ in range(points.n)]
    for j in range(1, points.N + 1):
        b = points.values.index(x[sigma[j - 1] - 1])
        buckets[b].append(part(lam, j) + eta[j - 1])
    return tuple(normalize(sorted(bucket, reverse=True)) for bucket in buckets)


def _multiset_permutations(counts):
    """All sequences over blocks 0..n-1 with the given multiplicities."""
    n = len(counts)
    total = sum(counts)
    seq = []
    counts = list(counts)
    def rec():
        if len(seq) == total:
            yield tuple(seq)
            return
        for b in range(n):
            if counts[b]:
                counts[b] -= 1
                seq.append(b)
                yield from rec()
                seq.pop()
                counts[b] += 1
    return rec()


def _pattern_to_sigma(pattern, points):
    """A coset representative: positions assigned block-wise in increasing order."""
    starts = []
    acc = 0
    for m in points.multiplicities:
        starts.append(acc + 1)
        acc += m
    nxt = list(starts)
    sigma = []
    for b in pattern:
        sigma.append(nxt[b])
        nxt[b] += 1
    return tuple(sigma)


def coset_terms(lam, points):
    """One term of the coset decomposition per right coset (= per value pattern)."""
    lam = normalize(lam)
    N, n = points.N, points.n
    vals = points.values
    for pattern in _multiset_permutations(points.multiplicities):
        sigma = _pattern_to_sigma(pattern, points)
        phis = phi_partitions(lam, sigma, points)
        term = Fraction(1)
        for i in range(n):
            term *= vals[i] ** size(phis[i])
            term *= schur_principal(phis[i], points.multiplicities[i])
        for j in range(N):
            for k in range(j + 1, N):
                if pattern[j] != pattern[k]:
                    term /= vals[pattern[j]] - vals[pattern[k]]
        yield sigma, phis, term


def schur_coset_formula(lam, points):
    """s_lam at the expanded point list, summed over right cosets."""
    total = Fraction(0)
    for _sigma, _phis, term in coset_terms(lam, points):
        total += term
    return total


# ---------------------------------------------------------------------------
# brute-force oracles, used by the test suite

def schur_by_ssyt(lam, points):
    """s_lam by explicit expansion over interlacing chains (semistandard tableaux)."""
    lam = normalize(lam)
    exact = all(_is_exact(x) for x in points)
    total = Fraction(0) if exact else 0.0
    def rec(shape, k, weight):
        nonlocal total
        if k == 0:
            if not shape:
                total += weight
            return
        from .partitions import horizontal_strips_below
        for mu in horizontal_strips_below(shape):
            rec(mu, k - 1, weight * points[k - 1] ** (size(shape) - size(mu)))
    rec(lam, len(points), Fraction(1) if exact else 1.0)
    return total
