"""Schur generating functions, class difference operators and factorization.

The generating function of the partition law just right of column t has the
closed product form; moments are pulled out of it with the Vandermonde
conjugated difference operators, evaluated by exact-rational central finite
differences around a regularizing offset of the coincident points.
"""

from fractions import Fraction

from .partitions import normalize, part, size, length
from .symfunc import schur, skew_schur
from .fock import boundary_schur_process, DivergenceError
from .model import RailYardModel, HypothesisError, enumeration_marginal

F = Fraction


class WeightClasses:
    """The (L,-) columns grouped by weight value, largest value first."""

    def __init__(self, model):
        cols = model.columns_of_kind("L-")
        if not cols:
            raise ValueError("model has no (L,-) columns")
        values = sorted({model.weight(i) for i in cols}, reverse=True)
        self.model = model
        self.values = tuple(values)
        self.classes = tuple(tuple(i for i in cols if model.weight(i) == v)
                             for v in values)
        # sigma0: rank -> column index, weights non-increasing, stable by position
        self.sigma0 = tuple(i for cls in self.classes for i in cls)

    @property
    def n(self):
        return len(self.values)

    def class_size(self, h):
        return len(self.classes[h - 1])

    def class_size_beyond(self, h, t):
        return sum(1 for i in self.classes[h - 1] if i > t)

    def sizes_beyond(self, t):
        return tuple(self.class_size_beyond(h, t) for h in range(1, self.n + 1))

    def columns_beyond(self, t):
        return [i for i in self.model.columns_of_kind("L-") if i > t]

    def class_of_column(self, i):
        for h, cls in enumerate(self.classes, start=1):
            if i in cls:
                return h
        raise KeyError(i)

    def block_offset(self, h, t):
        """I_{h-1}: coordinates of classes above h in the column-t partition."""
        return sum(self.class_size_beyond(d, t) for d in range(1, h))

    def class_partition(self, h):
        """Boundary parts travelling with class h under the dominant pairing."""
        lam = self.model.left_boundary
        start = sum(self.class_size(d) for d in range(1, h))
        return normalize([part(lam, j) for j in
                          range(start + 1, start + self.class_size(h) + 1)])


class PiecewiseBoundary:
    """Block description of the left boundary over the (L,-) columns."""

    def __init__(self, lam, n_lminus):
        lam = normalize(lam)
        if length(lam) > n_lminus:
            raise ValueError("boundary has more parts than (L,-) columns")
        self.N = n_lminus
        padded = [part(lam, j) for j in range(1, n_lminus + 1)]
        blocks = []
        for v in padded:
            if blocks and blocks[-1][0] == v:
                blocks[-1][1] += 1
            else:
                blocks.append([v, 1])
        self.values = tuple(b[0] for b in blocks)          # mu_1 > ... > mu_s
        self.block_sizes = tuple(b[1] for b in blocks)     # multiplicities
        self.s = len(blocks)
        # particle segments, lowest first: segment i has length K_i
        self.K = tuple(reversed(self.block_sizes))
        omega = [padded[n_lminus - j] - n_lminus + j - 1
                 for j in range(1, n_lminus + 1)]
        self.A = []
        self.B = []
        pos = 0
        for K in self.K:
            self.A.append(omega[pos])
            self.B.append(omega[pos + K - 1])
            pos += K
        self.A, self.B = tuple(self.A), tuple(self.B)
        for i in range(self.s):
            if self.B[i] - self.A[i] + 1 != self.K[i]:
                raise AssertionError("segment bookkeeping is inconsistent")
        # scaled endpoints; the half-open convention keeps sum(b - a) = 1
        self.a = tuple(F(A, self.N) for A in self.A)
        self.b = tuple(F(B + 1, self.N) for B in self.B)

    def segment_fractions(self):
        return self.a, self.b


def class_assignment(boundary, classes):
    """J_h: boundary blocks (by descending value) carried by each weight class."""
    sizes = [classes.class_size(h) for h in range(1, classes.n + 1)]
    if sum(sizes) != boundary.N:
        raise ValueError("class sizes and boundary length disagree")
    out = []
    t = 0
    for h, need in enumerate(sizes, start=1):
        got = 0
        blocks = []
        while got < need:
            if t >= boundary.s:
                raise ValueError("boundary blocks are not class-separable")
            blocks.append(t)
            got += boundary.block_sizes[t]
            t += 1
        if got != need:
            raise ValueError(
                "class %d needs %d parts but boundary blocks give %d"
                % (h, need, got))
        out.append(tuple(blocks))
    return tuple(out)


# ---------------------------------------------------------------------------
# the generating function

def sgf_points(model, t):
    """(u-columns, x-columns): (L,-) columns beyond t and up to t."""
    cols = model.columns_of_kind("L-")
    return [i for i in cols if i > t], [i for i in cols if i <= t]


def sgf_value(model, t, u):
    """Generating-function value for the law just right of column t.

    `u` maps each (L,-) column index beyond t to a point; at u = x the value
    is exactly 1.  Exact over rationals; floats pass through unchanged.
    """
    if model.right_boundary != ():
        raise HypothesisError("generating function needs an empty right boundary")
    if not model.satisfies_no_rminus():
        raise HypothesisError("generating function needs no (R,-) columns")
    ucols, xcols = sgf_points(model, t)
    if set(u) != set(ucols):
        raise ValueError("u must assign exactly the (L,-) columns beyond t")
    upoints = [u[i] for i in ucols]
    xpoints = [model.weight(i) for i in xcols]
    lam = model.left_boundary
    num = schur(lam, tuple(upoints) + tuple(xpoints))
    den = schur(lam, model.lminus_points())
    if den == 0:
        raise ZeroDivisionError("boundary Schur normalization vanishes")
    val = num / den
    for i in model.columns():
        if model.sign(i) != "+" or i > t:
            continue
        xi = model.weight(i)
        for j in ucols:
            uj = u[j]
            if model.letter(i) == "L":
                if 1 - xi * uj == 0 or xi * model.weight(j) == 1:
                    raise DivergenceError("pole in the exchange factor")
                val *= (1 - xi * model.weight(j)) / (1 - xi * uj)
            else:
                val *= (1 + xi * uj) / (1 + xi * model.weight(j))
    return val


def sgf_by_measure(model, t, u, trunc=None):
    """Oracle: sum the defining series against the exact boundary measure."""
    ucols, _ = sgf_points(model, t)
    meas = boundary_schur_process(model, t + 1, trunc=trunc)
    upoints = tuple(u[i] for i in ucols)
    xpoints = tuple(model.weight(i) for i in ucols)
    total = F(0)
    for lam, p in meas.entries.items():
        total += p * schur(lam, upoints) / schur(lam, xpoints)
    return total


# ---------------------------------------------------------------------------
# difference operators: exact finite differences at a regularized point

_STIRLING2 = {}


def _stirling2(k, j):
    if (k, j) in _STIRLING2:
        return _STIRLING2[(k, j)]
    if k == j == 0:
        val = 1
    elif k == 0 or j == 0 or j > k:
        val = 0
    else:
        val = j * _stirling2(k - 1, j) + _stirling2(k - 1, j - 1)
    _STIRLING2[(k, j)] = val
    return val


_FD_WEIGHTS = {}


def _fd_weights(order):
    """Central-stencil weights exact on polynomials, for the order-th derivative."""
    if order in _FD_WEIGHTS:
        return _FD_WEIGHTS[order]
    from math import factorial
    npts = order + 1 if order % 2 == 0 else order + 2
    half = npts // 2
    offsets = list(range(-half, half + 1))
    n = len(offsets)
    mat = [[F(o) ** i for o in offsets] for i in range(n)]
    rhs = [F(0)] * n
    rhs[order] = F(factorial(order))
    weights = _solve_exact(mat, rhs)
    _FD_WEIGHTS[order] = (weights, offsets)
    return weights, offsets


def _central_diff(f, point, var, order, step):
    """order-th partial derivative at point by an exact central stencil."""
    if order == 0:
        return f(point)
    weights, offsets = _fd_weights(order)
    total = F(0)
    for w, o in zip(weights, offsets):
        if w == 0:
            continue
        shifted = dict(point)
        shifted[var] = point[var] + o * step
        total += w * f(shifted)
    return total / step ** order


def _solve_exact(mat, rhs):
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for k in range(n):
        p = next(i for i in range(k, n) if a[i][k] != 0)
        a[k], a[p] = a[p], a[k]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k] / a[k][k]
                for j in range(k, n + 1):
                    a[i][j] -= f * a[k][j]
    return [a[i][n] / a[i][i] for i in range(n)]


def _euler_power(f, point, var, k, step):
    """(u d/du)^k f at point, via Stirling-weighted partials."""
    total = F(0)
    for j in range(1, k + 1):
        s2 = _stirling2(k, j)
        if s2:
            total += s2 * point[var] ** j * _central_diff(f, point, var, j, step)
    return total if k > 0 else f(point)


class OperatorSpec:
    """One factor D_{h,k} (class h, 1-based) or the all-class D_k (h=None)."""

    def __init__(self, k, h=None, power=1):
        self.k, self.h, self.power = int(k), h, int(power)


def _vandermonde_factors(ucols, classes, h):
    """(inside-class pairs, cross pairs with the sign split) for V_h * V_{h,*}."""
    inside, cross = [], []
    for a in range(len(ucols)):
        for b in range(a + 1, len(ucols)):
            i, j = ucols[a], ucols[b]
            ci, cj = classes.class_of_column(i), classes.class_of_column(j)
            if h is None:
                inside.append((i, j))
            elif ci == h and cj == h:
                inside.append((i, j))
            elif ci == h and cj != h:
                # outsider u_j (later position) against insider u_i
                cross.append((j, i, -1))
            elif cj == h and ci != h:
                cross.append((i, j, +1))
    return inside, cross


def _apply_operator(fun, spec, ucols, classes):
    """Wrap fun with one D_{h,k}: returns point -> (D fun)(point)."""
    inside, cross = _vandermonde_factors(ucols, classes, spec.h)
    if spec.h is None:
        members = list(ucols)
    else:
        members = [i for i in ucols if classes.class_of_column(i) == spec.h]

    def vand(point):
        v = F(1)
        for i, j in inside:
            v *= point[i] - point[j]
        for i, j, sign in cross:
            d = point[i] - point[j]
            v *= d if sign > 0 else -d
        return v

    def g(point):
        return vand(point) * fun(point)

    def out(point, _step_cache={}):
        step = point.get("__step__")
        total = F(0)
        for d in members:
            total += _euler_power(g, point, d, spec.k, step)
        return total / vand(point)
    return out


def _evaluate_operator_stack(model, t, specs, classes, eps, step):
    ucols, _ = sgf_points(model, t)
    base = {i: model.weight(i) for i in ucols}

    def S(point):
        u = {i: point[i] for i in ucols}
        return sgf_value(model, t, u)

    fun = S
    for spec in specs:
        for _ in range(spec.power):
            fun = _apply_operator(fun, spec, ucols, classes)
    # offset the coincident class values so every Vandermonde factor is nonzero
    point = {i: base[i] * (1 + eps * (idx + 1))
             for idx, i in enumerate(ucols)}
    point["__step__"] = step
    return fun(point)


def difference_operator_moments(model, t, specs, rel_tol=F(1, 100000),
                                eps=F(1, 128), step=None):
    """Evaluate a product of difference operators on the generating function.

    Runs in exact rational arithmetic: the coincident class points are offset
    by a small regularizer and the value extrapolated back with two Richardson
    levels.  Returns (value, error_estimate) as floats and raises when the
    final extrapolants disagree beyond rel_tol.
    """
    classes = WeightClasses(model)
    specs = [s if isinstance(s, OperatorSpec) else OperatorSpec(*s) for s in specs]
    total_order = sum(s.k * s.power for s in specs)
    ucols, _ = sgf_points(model, t)
    msize = max((sum(1 for i in ucols
                     if s.h is None or classes.class_of_column(i) == s.h)
                 for s in specs), default=1)
    if step is None:
        # keep the stencil error far below the Vandermonde amplification
        vexp = msize * (msize - 1) // 2 + total_order
        step = (eps / 8) ** max(2, (vexp + 2) // 2)
    vals = [_evaluate_operator_stack(model, t, specs, classes, e, step)
            for e in (eps, eps / 2, eps / 4, eps / 8)]
    lvl1 = [2 * b - a for a, b in zip(vals, vals[1:])]
    lvl2 = [(4 * b - a) / 3 for a, b in zip(lvl1, lvl1[1:])]
    value = lvl2[-1]
    scale = max(abs(value), F(1))
    err = abs(lvl2[-1] - lvl2[-2]) / scale
    if err > rel_tol:
        raise ArithmeticError(
            "finite-difference extrapolants disagree: rel err %.3g" % float(err))
    return float(value), float(err)


def difference_operator_moment(model, t, h, k, power=1, **kw):
    """Moment of the class-h block (shifted coordinates) at the column right of t."""
    val, _err = difference_operator_moments(
        model, t, [OperatorSpec(k, h=h, power=power)], **kw)
    return val


def exact_block_moment(model, t, h, k, trunc=None):
    """Oracle: E[sum_i (lam_i + offset - i)^k] over the class-h block, exactly."""
    classes = WeightClasses(model)
    meas = boundary_schur_process(model, t + 1, trunc=trunc)
    sizes = classes.sizes_beyond(t)
    lo = classes.block_offset(h, t)
    block = sizes[h - 1]
    offset = sum(sizes[h - 1:])
    total = F(0)
    for lam, p in meas.entries.items():
        acc = sum((part(lam, lo + i) + offset - i) ** k for i in range(1, block + 1))
        total += p * acc
    return total


def exact_full_moment(model, t, k, power=1, trunc=None):
    """Oracle for the all-class operator: E[(sum_i (lam_i + N - i)^k)^power]."""
    meas = boundary_schur_process(model, t + 1, trunc=trunc)
    N = sum(1 for i in model.columns_of_kind("L-") if i > t)
    total = F(0)
    for lam, p in meas.entries.items():
        s = sum((part(lam, i) + N - i) ** k for i in range(1, N + 1))
        total += p * s ** power
    return total


# ---------------------------------------------------------------------------
# factorization into per-class sub-models

def factor_submeasures(model, t, trunc=None):
    """The n sub-models of the weight-class factorization with their measures.

    Class 1 keeps every non-(L,-) column and the class-1 weights; classes
    h >= 2 live on the all-L graph with only their own weights nonzero.
    Boundaries are the class parts padded with zeros.
    """
    classes = WeightClasses(model)
    out = []
    n_lminus = len(model.columns_of_kind("L-"))
    for h in range(1, classes.n + 1):
        lam_h = classes.class_partition(h)
        weights = []
        lr = []
        for i in model.columns():
            if model.kind(i) == "L-":
                keep = classes.class_of_column(i) == h
                weights.append(model.weight(i) if keep else F(0))
            else:
                weights.append(model.weight(i) if h == 1 else F(0))
            lr.append(model.letter(i) if h == 1 else "L")
        sub = RailYardModel(model.l, model.r, "".join(lr), model.sign_seq,
                            weights, left_boundary=lam_h, right_boundary=())
        meas = boundary_schur_process(sub, t + 1, trunc=trunc)
        out.append((sub, meas))
    return out


def dominance_gap(model):
    """log-ratio of the leading coset term over the largest competitor.

    Positive means the aligned pairing of large weights with large boundary
    parts dominates the coset expansion of the boundary Schur value.
    """
    import math
    from .symfunc import PointMultiset, coset_terms

    classes = WeightClasses(model)
    if classes.n < 2:
        return math.inf
    pm = PointMultiset(classes.values,
                       [classes.class_size(h) for h in range(1, classes.n + 1)])
    lam = model.left_boundary
    lead = None
    best_other = None
    identity = tuple(range(1, pm.N + 1))
    for sigma, _phis, term in coset_terms(lam, pm):
        if term == 0:
            continue
        logv = math.log(abs(float(term)))
        if sigma == identity:
            lead = logv
        else:
            best_other = logv if best_other is None else max(best_other, logv)
    if lead is None:
        raise ValueError("leading coset term vanishes")
    if best_other is None:
        return math.inf
    return lead - best_other
