"""GUE references, the unitary-integral check, and the rescaling pipeline.

Conventions: the Hermitian matrix has N(0,1) diagonal entries and standard
complex Gaussian off-diagonal entries, so the (ordered) eigenvalue density
is proportional to prod (e_i - e_j)^2 * exp(-sum e_i^2 / 2) and a 1x1
spectrum is standard normal.
"""

import math
from fractions import Fraction

import numpy as np

from .partitions import part, length, counting_measure, normalize
from .symfunc import schur, schur_principal
from .sgf import WeightClasses, PiecewiseBoundary, class_assignment

F = Fraction


class GueSpectrum:
    def __init__(self, eigenvalues):
        self.eigenvalues = tuple(sorted(map(float, eigenvalues), reverse=True))

    @property
    def k(self):
        return len(self.eigenvalues)


def gue_matrix(k, rng):
    d = rng.standard_normal(k)
    off = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    h = np.triu(off, 1)
    return h + h.conj().T + np.diag(d)


def sample_gue_spectrum(k, seed):
    rng = np.random.default_rng(seed)
    return GueSpectrum(np.linalg.eigvalsh(gue_matrix(k, rng)))


def sample_gue_spectra(k, n, seed):
    """n spectra of k x k matrices, rows sorted descending."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((n, k))
    off = (rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k)))
    off /= np.sqrt(2)
    up = np.triu(off, 1)
    mats = up + np.conj(np.transpose(up, (0, 2, 1)))
    mats += d[:, :, None] * np.eye(k)[None, :, :]
    ev = np.linalg.eigvalsh(mats)
    return ev[:, ::-1]


_MARGINAL_CACHE = {}


def gue_marginal_reference(k, n=1_000_000, seed=20240901):
    """Cached k x k ensemble reference.

    Returns (sorted, mean, cov): per-eigenvalue sorted samples for KS
    comparisons, plus the joint mean vector and covariance (computed before
    the per-column sorting, which destroys the joint pairing).
    """
    key = (k, n, seed)
    if key not in _MARGINAL_CACHE:
        ev = sample_gue_spectra(k, n, seed)
        mean = ev.mean(axis=0)
        cov = np.cov(ev.T) if k > 1 else np.array([[np.var(ev)]])
        _MARGINAL_CACHE[key] = (np.sort(ev, axis=0), mean, cov)
    return _MARGINAL_CACHE[key]


def gue_joint_density(evals):
    """Unnormalized ordered-eigenvalue density in this normalization."""
    e = np.asarray(evals, dtype=float)
    v = 1.0
    k = len(e)
    for i in range(k):
        for j in range(i + 1, k):
            v *= (e[i] - e[j]) ** 2
    return v * math.exp(-0.5 * float(np.sum(e ** 2)))


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov distance against a cached reference sample

def ks_distance(sample, reference):
    """Two-sample sup-distance between empirical CDFs."""
    x = np.sort(np.asarray(sample, dtype=float))
    y = np.asarray(reference, dtype=float)  # already sorted
    allv = np.concatenate([x, y])
    cx = np.searchsorted(x, allv, side="right") / len(x)
    cy = np.searchsorted(y, allv, side="right") / len(y)
    return float(np.max(np.abs(cx - cy)))


# ---------------------------------------------------------------------------
# Haar unitaries and the unitary-integral identity

def haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph[None, :]


def hciz_check(lam, N, a, mc_samples=100_000, seed=0, batch=20_000):
    """Monte Carlo the unitary integral against the exact Schur ratio.

    Returns a report with the z-score of (prefactor * MC mean) against
    s_lam(e^a)/s_lam(1^N).
    """
    lam = normalize(lam)
    a = [float(v) for v in a]
    if len(a) != N:
        raise ValueError("need N exponents")
    warned = False
    for i in range(N):
        for j in range(i + 1, N):
            if a[i] == a[j]:
                a[j] += 1e-7 * (j + 1)
                warned = True
    if length(lam) > N:
        raise ValueError("partition longer than N")
    exact = float(schur(lam, tuple(math.exp(v) for v in a)) /
                  float(schur_principal(lam, N)))
    bdiag = np.array([part(lam, i) + N - i for i in range(1, N + 1)], dtype=float)
    adiag = np.array(a)
    pref = 1.0
    for i in range(N):
        for j in range(i + 1, N):
            pref *= (a[i] - a[j]) / (math.exp(a[i]) - math.exp(a[j]))
    rng = np.random.default_rng(seed)
    vals = np.empty(mc_samples)
    done = 0
    while done < mc_samples:
        nb = min(batch, mc_samples - done)
        z = (rng.standard_normal((nb, N, N)) +
             1j * rng.standard_normal((nb, N, N))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        ph = np.diagonal(r, axis1=1, axis2=2)
        u = q * (ph / np.abs(ph))[:, None, :]
        # Tr(U* A U B) = sum_{ij} a_i b_j |u_ij|^2 for diagonal A, B
        w = np.abs(u) ** 2
        vals[done:done + nb] = np.exp(np.einsum("i,sij,j->s", adiag, w, bdiag))
        done += nb
    mean = float(np.mean(vals)) * pref
    stderr = float(np.std(vals, ddof=1) / math.sqrt(mc_samples)) * abs(pref)
    if N == 1:
        z = 0.0
    else:
        z = (mean - exact) / stderr if stderr else math.inf
    return {"N": N, "lam": lam, "a": tuple(a), "mc": mean, "exact": exact,
            "stderr": stderr, "z": z, "perturbed": warned,
            "samples": mc_samples}


# ---------------------------------------------------------------------------
# limiting counting measures of the class partitions

class LimitBands:
    """Density-one bands of the limiting class counting measure."""

    def __init__(self, bands):
        bands = sorted((F(a), F(b)) for a, b in bands)
        for (a1, b1), (a2, b2) in zip(bands, bands[1:]):
            if b1 > a2:
                raise ValueError("bands overlap")
        if any(b <= a for a, b in bands):
            raise ValueError("bands must have positive width")
        self.bands = tuple(bands)

    def total_length(self):
        return sum(b - a for a, b in self.bands)

    def moment(self, k):
        return sum((b ** (k + 1) - a ** (k + 1)) / (k + 1) for a, b in self.bands)


def class_limit_bands(boundary, classes, h):
    """Bands of the class-h limit measure from the piecewise boundary data.

    Segment j of the boundary (width b_j - a_j) assigned to class h maps to
    a band of width (b_j - a_j)/theta_h; bands stack downward from the top
    value, preserving the gaps scaled by 1/theta_h.
    """
    assign = class_assignment(boundary, classes)
    blocks = assign[h - 1]              # boundary block indices, top value first
    N = boundary.N
    theta = F(classes.class_size(h), N)
    a, b = boundary.a, boundary.b
    # block t (descending values) corresponds to segment j = s - 1 - t (0-based)
    bands = []
    offset = F(0)   # class parts already placed above, in units of N
    for t in blocks:
        j = boundary.s - 1 - t
        width = b[j] - a[j]
        mj = a[j] + 1 - sum(b[i] - a[i] for i in range(j))   # mu_t / N
        hi = (mj - offset) / theta + 1
        bands.append((hi - width / theta, hi))
        offset += width
    return LimitBands(bands)


def limit_measure_moments(boundary, classes, h, mode="limit"):
    """(psi1, psi2) of the class-h measure: banded limit or finite empirical."""
    if mode == "limit":
        bands = class_limit_bands(boundary, classes, h)
        if bands.total_length() != 1:
            raise ValueError("band data inconsistent: total length != 1")
        return bands.moment(1), bands.moment(2)
    if mode == "finite":
        lam = classes.class_partition(h)
        n = classes.class_size(h)
        cm = counting_measure(lam, n)
        return cm.psi1(), cm.psi2()
    raise ValueError("mode must be 'limit' or 'finite'")


# ---------------------------------------------------------------------------
# rescaling constants

class RescalingConstants:
    def __init__(self, h, A, B, psi1, psi2):
        self.h = h
        self.A = F(A)
        self.B = F(B)
        self.psi1, self.psi2 = F(psi1), F(psi2)
        if self.B <= 0:
            raise ValueError("nonpositive variance constant B")

    def __repr__(self):
        return "RescalingConstants(h=%d, A=%s, B=%s)" % (self.h, self.A, self.B)


def rescaling_constants(model, t, h, psi):
    """A_h and B_h from the class moments and the plus-column weight sums.

    For h = 1 the exchange channels of the plus columns up to t enter: a
    same-letter (L,+) column against the top weight contributes the
    1/(1 - x x*) forms, an (R,+) column the 1/(1 + x x*) forms.  The sums
    land at the same sqrt(N) order as the class moments only after division
    by the class size (they multiply v/sqrt(N) in the exponent expansion,
    while the moment terms multiply sqrt(N) v).
    """
    psi1, psi2 = F(psi[0]), F(psi[1])
    if h >= 2:
        return RescalingConstants(h, psi1 - F(1, 2), psi2 - psi1 ** 2, psi1, psi2)
    classes = WeightClasses(model)
    xstar = classes.values[0]
    n1 = classes.class_size(1)
    A = psi1 - F(1, 2)
    B = psi2 - psi1 ** 2 - F(1, 12)
    for i in model.columns():
        if i > t or model.sign(i) != "+":
            continue
        y = model.weight(i) * xstar
        if model.letter(i) == "L":
            if y >= 1:
                raise ValueError("divergent channel weight")
            A += y / (1 - y) / n1
            B += y / (1 - y) ** 2 / n1
        else:
            A += y / (1 + y) / n1
            B += y / (1 + y) ** 2 / n1
    return RescalingConstants(1, A, B, psi1, psi2)


# ---------------------------------------------------------------------------
# the comparison of rescaled block coordinates with GUE spectra

class GueComparisonReport:
    def __init__(self, N_class, k, ks_B, ks_sqrtB, mean_err, cov_err, n_samples):
        self.N_class = N_class
        self.k = k
        self.ks_B = tuple(ks_B)
        self.ks_sqrtB = tuple(ks_sqrtB)
        self.mean_err = tuple(mean_err)
        self.cov_err = float(cov_err)
        self.n_samples = int(n_samples)

    def best(self):
        return "sqrtB" if max(self.ks_sqrtB) <= max(self.ks_B) else "B"

    def best_ks(self):
        return min(max(self.ks_sqrtB), max(self.ks_B))


def rescaled_block_coordinates(block_rows, n_class, k, constants):
    """b-coordinates of a block sample array (n_samples x k), both normalizations.

    Row coordinate i uses q_i = lam_{(block) i} + k - i, centered by
    sqrt(N_class) * A_h; returned as (b_over_B, b_over_sqrtB).
    """
    q = np.asarray(block_rows, dtype=float) + \
        (k - np.arange(1, k + 1))[None, :]
    centered = q / math.sqrt(n_class) - math.sqrt(n_class) * float(constants.A)
    b_B = centered / float(constants.B)
    b_sB = centered / math.sqrt(float(constants.B))
    return b_B, b_sB


def gue_compare(block_rows, n_class, k, constants, reference_n=200_000,
                reference_seed=20240901):
    """Per-coordinate KS distances of the rescaled block against GUE_k marginals."""
    block_rows = np.asarray(block_rows, dtype=float)
    if block_rows.shape[1] != k:
        raise ValueError("need k columns of block coordinates")
    ref_sorted, ref_mean, ref_cov = gue_marginal_reference(
        k, n=reference_n, seed=reference_seed)
    b_B, b_sB = rescaled_block_coordinates(block_rows, n_class, k, constants)
    ks_B = [ks_distance(b_B[:, i], ref_sorted[:, i]) for i in range(k)]
    ks_sB = [ks_distance(b_sB[:, i], ref_sorted[:, i]) for i in range(k)]
    mean_err = np.abs(b_sB.mean(axis=0) - ref_mean)
    emp_cov = np.cov(b_sB.T) if k > 1 else np.array([[np.var(b_sB)]])
    cov_err = float(np.max(np.abs(emp_cov - ref_cov)))
    return GueComparisonReport(n_class, k, ks_B, ks_sB, mean_err, cov_err,
                               len(block_rows))
