"""Truncated bosonic Fock space: transfer kernels on the span of partitions.

The four column operators act on sparse partition-indexed vectors.  Exact
mode keeps Fraction coefficients end to end; float mode is for Monte Carlo
scale.  Truncation never loses mass silently: every operator application
accounts the dropped weight analytically.
"""

import bisect
from fractions import Fraction

import numpy as np

from .partitions import (
    normalize, part, size, conjugate, interlaces, interlaces_conjugate,
    horizontal_strips_below, horizontal_strips_above,
    vertical_strips_below, vertical_strips_above,
)

KINDS = ("L+", "L-", "R+", "R-")


def flip_sign(kind):
    return kind[0] + ("-" if kind[1] == "+" else "+")


class TruncationPolicy:
    """Finite window of Fock space: caps on first part and length, weight floor."""

    def __init__(self, max_first_part, max_length, weight_floor=0):
        if max_first_part < 0 or max_length < 0:
            raise ValueError("caps must be non-negative")
        self.max_first_part = int(max_first_part)
        self.max_length = int(max_length)
        self.weight_floor = weight_floor

    def admits(self, lam):
        return (not lam or lam[0] <= self.max_first_part) and \
            len(lam) <= self.max_length

    def __repr__(self):
        return "TruncationPolicy(max_first_part=%d, max_length=%d, weight_floor=%r)" % (
            self.max_first_part, self.max_length, self.weight_floor)


class PartitionMeasure:
    """Sparse weights over partitions.  Not necessarily normalized."""

    def __init__(self, entries=None, exact=True, dropped_mass=None):
        self.entries = dict(entries or {})
        self.exact = exact
        self.dropped_mass = dropped_mass if dropped_mass is not None else \
            (Fraction(0) if exact else 0.0)

    @classmethod
    def point_mass(cls, lam, exact=True):
        one = Fraction(1) if exact else 1.0
        return cls({normalize(lam): one}, exact=exact)

    def total_mass(self):
        zero = Fraction(0) if self.exact else 0.0
        return sum(self.entries.values(), zero)

    def normalized(self):
        z = self.total_mass()
        if z == 0:
            raise ZeroDivisionError("cannot normalize an empty measure")
        return PartitionMeasure(
            {k: v / z for k, v in self.entries.items()},
            exact=self.exact, dropped_mass=self.dropped_mass / z)

    def __getitem__(self, lam):
        lam = normalize(lam)
        return self.entries.get(lam, Fraction(0) if self.exact else 0.0)

    def __len__(self):
        return len(self.entries)

    def support(self):
        return sorted(self.entries)


def gamma_targets(kind, lam, trunc):
    """States reachable from |lam> under one operator, with |size| exponents."""
    if kind == "L+":
        gen = horizontal_strips_below(lam)
    elif kind == "R+":
        gen = vertical_strips_below(lam)
    elif kind == "L-":
        gen = horizontal_strips_above(lam, trunc.max_first_part, trunc.max_length)
    elif kind == "R-":
        gen = vertical_strips_above(lam, trunc.max_first_part, trunc.max_length)
    else:
        raise ValueError("unknown operator kind %r" % (kind,))
    for mu in gen:
        yield mu, abs(size(mu) - size(lam))


def step_relation_holds(kind, left, right):
    """True iff partitions (left, right) may sit across a column of this kind."""
    if kind == "L+":
        return interlaces(left, right)
    if kind == "L-":
        return interlaces(right, left)
    if kind == "R+":
        return interlaces_conjugate(left, right)
    if kind == "R-":
        return interlaces_conjugate(right, left)
    raise ValueError(kind)


def _geom_sum(x, n_terms, exact):
    """1 + x + ... + x^{n_terms-1}, with n_terms=None meaning the full series."""
    one = Fraction(1) if exact else 1.0
    if x == 0:
        return one
    if n_terms is None:
        if not (0 <= x < 1):
            return None  # divergent
        return one / (one - x)
    return sum(x ** k for k in range(n_terms))


def gamma_total_mass(kind, x, lam, exact=True):
    """Sum of coefficients of Gamma_kind(x)|lam>; None when the series diverges."""
    if kind in ("L+", "R+"):
        # rows mu_i range over [lam_{i+1}, lam_i]: a finite product
        shape = lam if kind == "L+" else conjugate(lam)
        total = Fraction(1) if exact else 1.0
        for i in range(1, len(shape) + 1):
            total *= _geom_sum(x, shape[i - 1] - part(shape, i + 1) + 1, exact)
        return total
    shape = lam if kind == "L-" else conjugate(lam)
    head = _geom_sum(x, None, exact)
    if head is None:
        return None
    total = head
    n = len(shape)
    for i in range(2, n + 1):
        total *= _geom_sum(x, shape[i - 2] - shape[i - 1] + 1, exact)
    if n:
        total *= _geom_sum(x, shape[n - 1] + 1, exact)  # optional new row
    return total


def apply_gamma(kind, x, vec, trunc):
    """One transfer step: linear action of Gamma_kind(x) on a PartitionMeasure.

    Truncation-dropped weight is accumulated in the result's dropped_mass
    (computed from the analytic row-product mass, so nothing is lost
    silently even for the divergence-prone minus kinds).
    """
    exact = vec.exact
    if exact and not isinstance(x, (int, Fraction)):
        raise TypeError("exact-mode measures need rational x")
    x = Fraction(x) if exact else float(x)
    if x < 0:
        raise ValueError("operator weight must be non-negative")
    zero = Fraction(0) if exact else 0.0
    out = {}
    dropped = vec.dropped_mass
    floor = trunc.weight_floor
    for lam, coeff in vec.entries.items():
        if coeff == 0:
            continue
        generated = zero
        for mu, expo in gamma_targets(kind, lam, trunc):
            w = coeff * x ** expo
            if w == 0:
                continue
            generated += w
            if floor and abs(w) < floor:
                dropped += abs(w)
                continue
            out[mu] = out.get(mu, zero) + w
        full = gamma_total_mass(kind, x, lam, exact)
        if full is None:
            raise DivergenceError(
                "Gamma_%s(%s) has divergent total mass on |%s>" % (kind, x, (lam,)))
        dropped += coeff * full - generated
    return PartitionMeasure(out, exact=exact, dropped_mass=dropped)


def apply_gamma_transpose(kind, x, vec, trunc):
    """Bra-side evolution <v|Gamma_kind(x); same combinatorics with the sign flipped."""
    return apply_gamma(flip_sign(kind), x, vec, trunc)


class DivergenceError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# commutation relations

def commutation_factor(kind1, kind2, x1, x2):
    """z with Gamma_{a1,+}(x1) Gamma_{a2,-}(x2) = z Gamma_{a2,-}(x2) Gamma_{a1,+}(x1).

    Same-sign pairs commute (z = 1).  For (-,+) order the factor inverts.
    """
    a1, b1 = kind1[0], kind1[1]
    a2, b2 = kind2[0], kind2[1]
    x1, x2 = Fraction(x1), Fraction(x2)
    if b1 == b2:
        return Fraction(1)
    if a1 == a2:
        if x1 * x2 >= 1:
            raise DivergenceError("x1*x2 >= 1 in a same-letter (+,-) exchange")
        z = 1 / (1 - x1 * x2)
    else:
        z = 1 + x1 * x2
    return z if b1 == "+" else 1 / z


def verify_commutation(kind1, kind2, x1, x2, trunc, test_states=None):
    """Compare Gamma1 Gamma2 |lam> against the rescaled swapped product.

    Coefficients are compared on the window of states whose truncated
    expansion is provably complete; outside it the discrepancy must be
    covered by the accounted dropped mass.  Returns a small report dict.
    """
    if test_states is None:
        test_states = [(), (1,), (2, 1), (3, 1, 1)]
    z = commutation_factor(kind1, kind2, x1, x2)
    worst = Fraction(0)
    worst_bound = Fraction(0)
    cases = []
    for lam in test_states:
        v = PartitionMeasure.point_mass(lam, exact=True)
        lhs = apply_gamma(kind1, Fraction(x1), apply_gamma(kind2, Fraction(x2), v, trunc), trunc)
        rhs = apply_gamma(kind2, Fraction(x2), apply_gamma(kind1, Fraction(x1), v, trunc), trunc)
        support = set(lhs.entries) | set(rhs.entries)
        tail = lhs.dropped_mass + z * rhs.dropped_mass
        disc = Fraction(0)
        for mu in support:
            disc = max(disc, abs(lhs[mu] - z * rhs[mu]))
        worst = max(worst, disc)
        worst_bound = max(worst_bound, tail)
        cases.append({"state": lam, "max_discrepancy": disc, "tail_bound": tail})
    ok = all(c["max_discrepancy"] <= c["tail_bound"] for c in cases)
    return {"kinds": (kind1, kind2), "x": (x1, x2), "factor": z,
            "ok": ok, "max_discrepancy": worst, "tail_bound": worst_bound,
            "cases": cases}


# ---------------------------------------------------------------------------
# boundary measures and the generic table sampler

def default_truncation(model, slack=8):
    lb = model.left_boundary
    plus_steps = sum(1 for i in model.columns() if model.sign(i) == "+")
    minus_steps = sum(1 for i in model.columns() if model.sign(i) == "-")
    cap_part = (lb[0] if lb else 0) + plus_steps + slack
    rb = model.right_boundary
    cap_part = max(cap_part, (rb[0] if rb else 0) + plus_steps + slack)
    cap_len = minus_steps + len(lb) + len(rb)
    return TruncationPolicy(cap_part, max(cap_len, 1))


def forward_tables(model, trunc, exact=True, upto=None):
    """F_m(v) = <lambda^(l)| Gamma_l ... Gamma_{m-1} |v> for m = l .. upto."""
    upto = model.r + 1 if upto is None else upto
    vec = PartitionMeasure.point_mass(model.left_boundary, exact=exact)
    tables = {model.l: vec}
    for m in range(model.l, upto):
        x = model.weight(m) if exact else float(model.weight(m))
        vec = apply_gamma_transpose(model.kind(m), x, vec, trunc)
        tables[m + 1] = vec
    return tables

def backward_tables(model, trunc, exact=True, downto=None):
    """B_m(v) = <v| Gamma_m ... Gamma_r |lambda^(r+1)> for m = downto .. r+1."""
    downto = model.l if downto is None else downto
    vec = PartitionMeasure.point_mass(model.right_boundary, exact=exact)
    tables = {model.r + 1: vec}
    for m in range(model.r, downto - 1, -1):
        x = model.weight(m) if exact else float(model.weight(m))
        vec = apply_gamma(model.kind(m), x, vec, trunc)
        tables[m] = vec
    return tables


def boundary_schur_process(model, t, trunc=None, exact=True,
                           dropped_warn=Fraction(1, 1000)):
    """Law of the partition at odd column t (between operators t-1 and t).

    Forward and backward truncated transfer passes multiplied entrywise and
    normalized.  A warning flag is set when the accounted dropped mass is
    not negligible against the total.
    """
    if not (model.l <= t <= model.r + 1):
        raise ValueError("t must lie in [l .. r+1]")
    trunc = trunc or default_truncation(model)
    fwd = forward_tables(model, trunc, exact=exact, upto=t)[t]
    bwd = backward_tables(model, trunc, exact=exact, downto=t)[t]
    zero = Fraction(0) if exact else 0.0
    ent = {}
    for lam, f in fwd.entries.items():
        b = bwd.entries.get(lam)
        if b and f:
            ent[lam] = f * b
    meas = PartitionMeasure(ent, exact=exact)
    total = meas.total_mass()
    if total == 0:
        raise ValueError("no covering is compatible with the boundary data")
    dropped = fwd.dropped_mass + bwd.dropped_mass
    meas = meas.normalized()
    meas.dropped_mass = dropped / total
    meas.truncation_warning = dropped / total > dropped_warn
    return meas


def column_marginals(model, trunc=None, exact=True):
    """Marginal law at every odd column, from one forward and one backward sweep."""
    trunc = trunc or default_truncation(model)
    fwd = forward_tables(model, trunc, exact=exact)
    bwd = backward_tables(model, trunc, exact=exact)
    out = {}
    for t in range(model.l, model.r + 2):
        ent = {}
        for lam, f in fwd[t].entries.items():
            b = bwd[t].entries.get(lam)
            if b and f:
                ent[lam] = f * b
        meas = PartitionMeasure(ent, exact=exact)
        out[t] = meas.normalized()
    return out


class TableSampler:
    """Sequential conditional sampler driven by cached backward tables.

    Intended for small models; the structured fast lane covers the large
    reference experiments.
    """

    def __init__(self, model, trunc=None, seed=0):
        self.model = model
        self.trunc = trunc or default_truncation(model)
        self.seed = seed
        self._backward = backward_tables(model, self.trunc, exact=True)
        self._transitions = {}
        if self._backward[model.l][model.left_boundary] == 0:
            raise ValueError("left boundary unreachable: partition function is 0")

    def _transition(self, m, kappa):
        key = (m, kappa)
        cached = self._transitions.get(key)
        if cached is not None:
            return cached
        x = float(self.model.weight(m))
        bwd = self._backward[m + 1]
        targets = []
        weights = []
        # forward step across column m: <kappa|Gamma_m|nu> pairs kappa with the
        # sign-flipped target set of nu's
        for nu, expo in gamma_targets(flip_sign(self.model.kind(m)), kappa, self.trunc):
            b = bwd.entries.get(nu)
            if not b:
                continue
            targets.append(nu)
            weights.append((x ** expo) * float(b))
        if not targets:
            raise ValueError("dead end at column %d from %r" % (m, kappa))
        cum = np.cumsum(weights)
        cum /= cum[-1]
        self._transitions[key] = (targets, cum)
        return targets, cum

    def sample(self, rng):
        from .model import DimerSample
        chain = [self.model.left_boundary]
        kappa = self.model.left_boundary
        for m in self.model.columns():
            targets, cum = self._transition(m, kappa)
            kappa = targets[bisect.bisect_left(cum, rng.random())]
            chain.append(kappa)
        if chain[-1] != self.model.right_boundary:
            raise AssertionError("chain did not hit the right boundary")
        return DimerSample(tuple(chain), start_column=self.model.l)

    def sample_many(self, n, seed=None, replica=0):
        seed = self.seed if seed is None else seed
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replica,)))
        return [self.sample(rng) for _ in range(n)]


def sample_covering(model, rng_seed=0, trunc=None, n=1):
    """Draw n exact samples from the covering law (table-based path)."""
    sampler = TableSampler(model, trunc=trunc, seed=rng_seed)
    return sampler.sample_many(n)
