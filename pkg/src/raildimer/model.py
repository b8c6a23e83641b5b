"""Rail-yard graph instances, covering weights and exact partition functions.

A model is the column data (LR letters, signs, one weight per column) plus
the boundary partitions.  Coverings are represented by their interlacing
partition chains; edge geometry is derived on demand.
"""

import json
from fractions import Fraction

from . import fock
from .partitions import (
    normalize, part, size, length, conjugate, format_partition,
    parse_partition, interlaces, interlaces_conjugate,
)
from .symfunc import schur
from .fock import (
    PartitionMeasure, TruncationPolicy, DivergenceError,
    apply_gamma, apply_gamma_transpose, gamma_targets, step_relation_holds,
)


class HypothesisError(ValueError):
    """A closed-form formula was called outside its hypotheses."""


def parse_weight(w):
    if isinstance(w, str):
        if "/" in w:
            num, den = w.split("/")
            return Fraction(int(num), int(den))
        return Fraction(w)
    return Fraction(w)


class RailYardModel:
    """RYG(l, r, lr_seq, sign_seq) with per-column weights and boundary partitions."""

    def __init__(self, l, r, lr_seq, sign_seq, weights,
                 left_boundary=(), right_boundary=()):
        self.l, self.r = int(l), int(r)
        if self.l > self.r:
            raise ValueError("need l <= r")
        n = self.r - self.l + 1
        self.lr_seq = str(lr_seq)
        self.sign_seq = str(sign_seq)
        if len(self.lr_seq) != n or set(self.lr_seq) - set("LR"):
            raise ValueError("lr_seq must be a length-%d string over {L,R}" % n)
        if len(self.sign_seq) != n or set(self.sign_seq) - set("+-"):
            raise ValueError("sign_seq must be a length-%d string over {+,-}" % n)
        self.weights = tuple(parse_weight(w) for w in weights)
        if len(self.weights) != n:
            raise ValueError("need one weight per column")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        self.left_boundary = normalize(left_boundary)
        self.right_boundary = normalize(right_boundary)

    # -- column accessors ---------------------------------------------------
    def columns(self):
        return range(self.l, self.r + 1)

    def letter(self, i):
        return self.lr_seq[i - self.l]

    def sign(self, i):
        return self.sign_seq[i - self.l]

    def kind(self, i):
        return self.letter(i) + self.sign(i)

    def weight(self, i):
        return self.weights[i - self.l]

    def columns_of_kind(self, kind):
        return [i for i in self.columns() if self.kind(i) == kind]

    def lminus_points(self):
        return tuple(self.weight(i) for i in self.columns_of_kind("L-"))

    def rminus_points(self):
        return tuple(self.weight(i) for i in self.columns_of_kind("R-"))

    def satisfies_no_rminus(self):
        return not self.columns_of_kind("R-")

    def satisfies_no_lminus(self):
        return not self.columns_of_kind("L-")

    def plus_minus_pairs(self):
        cols = list(self.columns())
        for ai, i in enumerate(cols):
            if self.sign(i) != "+":
                continue
            for j in cols[ai + 1:]:
                if self.sign(j) == "-":
                    yield i, j

    def z_factor(self, i, j):
        xi, xj = self.weight(i), self.weight(j)
        if self.letter(i) != self.letter(j):
            return 1 + xi * xj
        if xi * xj >= 1:
            raise DivergenceError(
                "same-letter (+,-) pair (%d,%d) has x_i*x_j = %s >= 1"
                % (i, j, xi * xj))
        return 1 / (1 - xi * xj)

    def interaction_product(self):
        z = Fraction(1)
        for i, j in self.plus_minus_pairs():
            z *= self.z_factor(i, j)
        return z

    def check_convergence(self):
        for i, j in self.plus_minus_pairs():
            self.z_factor(i, j)

    # -- serialization ------------------------------------------------------
    def to_dict(self):
        return {
            "l": self.l, "r": self.r,
            "lr_seq": self.lr_seq, "sign_seq": self.sign_seq,
            "weights": [str(w) for w in self.weights],
            "left_boundary": format_partition(self.left_boundary),
            "right_boundary": format_partition(self.right_boundary),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["l"], d["r"], d["lr_seq"], d["sign_seq"], d["weights"],
                   parse_partition(d.get("left_boundary", "()")),
                   parse_partition(d.get("right_boundary", "()")))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __repr__(self):
        return "RailYardModel(l=%d, r=%d, %s/%s)" % (
            self.l, self.r, self.lr_seq, self.sign_seq)


# ---------------------------------------------------------------------------
# exact partition function

def partition_function(model):
    """Exact weighted sum over coverings with the model's boundary conditions.

    The operator word is sorted (every plus factor commuted to the right of
    every minus factor, collecting the exchange factors), after which both
    remaining passes only shrink partitions and the middle contraction is a
    finite sum.
    """
    model.check_convergence()
    zprod = model.interaction_product()
    minus_ops = [(model.kind(i), model.weight(i))
                 for i in model.columns() if model.sign(i) == "-"]
    plus_ops = [(model.kind(i), model.weight(i))
                for i in model.columns() if model.sign(i) == "+"]
    cap = max([part(model.left_boundary, 1), part(model.right_boundary, 1), 1])
    trunc = TruncationPolicy(cap, max(len(model.left_boundary),
                                      len(model.right_boundary), 1))
    bra = PartitionMeasure.point_mass(model.left_boundary, exact=True)
    for kind, x in minus_ops:
        bra = apply_gamma_transpose(kind, x, bra, trunc)
    ket = PartitionMeasure.point_mass(model.right_boundary, exact=True)
    for kind, x in reversed(plus_ops):
        ket = apply_gamma(kind, x, ket, trunc)
    assert bra.dropped_mass == 0 and ket.dropped_mass == 0
    total = Fraction(0)
    small, big = (bra, ket) if len(bra) <= len(ket) else (ket, bra)
    for lam, c in small.entries.items():
        d = big.entries.get(lam)
        if d:
            total += c * d
    return zprod * total


def product_formula(model):
    """Closed-form partition function: boundary Schur factor times exchange factors."""
    if model.right_boundary != ():
        raise HypothesisError("product formula needs an empty right boundary")
    model.check_convergence()
    if model.left_boundary == ():
        s = Fraction(1)
    elif model.satisfies_no_rminus():
        s = schur(model.left_boundary, model.lminus_points())
    elif model.satisfies_no_lminus():
        s = schur(conjugate(model.left_boundary), model.rminus_points())
    else:
        raise HypothesisError(
            "nonempty left boundary needs all columns != (R,-) or all != (L,-)")
    return s * model.interaction_product()


# ---------------------------------------------------------------------------
# coverings as partition chains

class DimerSample:
    """One covering: the partitions along odd columns start_column .. (start+len-1).

    Full-model samples have start_column = l and r - l + 2 partitions; the
    structured fast lane emits suffix windows (start_column > l) for models
    whose prefix is not materialized.
    """

    def __init__(self, partitions, start_column):
        self.partitions = tuple(normalize(p) for p in partitions)
        self.start_column = int(start_column)

    def column_range(self):
        return range(self.start_column, self.start_column + len(self.partitions))

    def partition_at(self, m):
        if m not in self.column_range():
            raise KeyError("column %d outside sample window %r" %
                           (m, self.column_range()))
        return self.partitions[m - self.start_column]

    def is_full(self, model):
        return self.start_column == model.l and \
            len(self.partitions) == model.r - model.l + 2

    def validate(self, model):
        last = self.start_column + len(self.partitions) - 1
        for m in range(self.start_column, min(model.r, last - 1) + 1):
            left, right = self.partition_at(m), self.partition_at(m + 1)
            if not step_relation_holds(model.kind(m), left, right):
                raise ValueError("columns %d-%d violate the %s step relation"
                                 % (m, m + 1, model.kind(m)))
        if self.is_full(model):
            if self.partitions[0] != model.left_boundary or \
               self.partitions[-1] != model.right_boundary:
                raise ValueError("sample boundaries disagree with the model")

    def diag_count(self, i):
        """Number of diagonal dimers on the even column 2i."""
        return abs(size(self.partition_at(i + 1)) - size(self.partition_at(i)))

    def diag_counts(self):
        return tuple(self.diag_count(i) for i in self.column_range()
                     if i + 1 in self.column_range())

    def diagonal_cells(self, i):
        """Debug view: the strip cells (row, col) carried by even column 2i."""
        a, b = self.partition_at(i), self.partition_at(i + 1)
        small, bigp = (a, b) if size(a) <= size(b) else (b, a)
        cells = []
        for row in range(1, length(bigp) + 1):
            for col in range(part(small, row) + 1, part(bigp, row) + 1):
                cells.append((row, col))
        return cells


def sample_weight(sample, model):
    """w(M) = prod_i x_i^{d_i(M)} over the sample's column window."""
    sample.validate(model)
    w = Fraction(1)
    for i in sample.column_range():
        if i + 1 in sample.column_range() and i <= model.r:
            w *= model.weight(i) ** sample.diag_count(i)
    return w


def covering_probability(sample, model):
    return sample_weight(sample, model) / partition_function(model)


# -- particle-hole encoding --------------------------------------------------

class ParticleHoleColumn:
    """Particle positions of one odd column in the half-integer Maya encoding."""

    def __init__(self, lam, shift=0):
        self.lam = normalize(lam)
        self.shift = int(shift)

    def particle_positions(self, depth=None):
        """Positions lam_i - i + shift (the +1/2 offset left implicit)."""
        depth = depth or (length(self.lam) + abs(self.shift) + 2)
        return [part(self.lam, i) - i + self.shift for i in range(1, depth + 1)]

    def charge(self):
        """Particles weakly above the axis minus holes strictly below it."""
        n = length(self.lam) + abs(self.shift) + 2
        pos = set(self.particle_positions(depth=n))
        particles_above = sum(1 for p in pos if p >= 0)
        low = min(pos)
        holes_below = sum(1 for m in range(low, 0) if m not in pos)
        return particles_above - holes_below


def charge(sample, m):
    """Charge of the covering read on odd column m (constant across columns)."""
    return ParticleHoleColumn(sample.partition_at(m)).charge()


# ---------------------------------------------------------------------------
# brute-force enumeration (the oracle for everything downstream)

def enumerate_coverings(model, cap):
    """Every interlacing chain within the cap box, with its exact weight.

    Returns (samples, stabilized): stabilized is False when some chain
    touched the cap, i.e. the weighted sum may not have converged yet.
    """
    trunc = TruncationPolicy(cap, cap)
    chains = []
    touched = [False]

    def rec(m, chain):
        if m > model.r:
            if chain[-1] == model.right_boundary:
                chains.append(tuple(chain))
                if any(p and (p[0] >= cap or len(p) >= cap) for p in chain):
                    touched[0] = True
            return
        kappa = chain[-1]
        for nu, _expo in step_candidates(model, m, kappa, trunc):
            chain.append(nu)
            rec(m + 1, chain)
            chain.pop()

    rec(model.l, [model.left_boundary])
    out = []
    for chain in chains:
        s = DimerSample(chain, start_column=model.l)
        out.append((s, sample_weight(s, model)))
    return out, not touched[0]


def step_candidates(model, m, kappa, trunc):
    """Partitions that may follow kappa across column m, with size exponents."""
    kind = model.kind(m)
    flipped = fock.flip_sign(kind)
    return gamma_targets(flipped, kappa, trunc)


def enumeration_marginal(model, t, cap):
    """Exact law of the partition at odd column t from full enumeration."""
    samples, stabilized = enumerate_coverings(model, cap)
    if not samples:
        raise ValueError("no covering within the cap")
    acc = {}
    for s, w in samples:
        lam = s.partition_at(t)
        acc[lam] = acc.get(lam, Fraction(0)) + w
    meas = PartitionMeasure(acc, exact=True).normalized()
    meas.stabilized = stabilized
    return meas
