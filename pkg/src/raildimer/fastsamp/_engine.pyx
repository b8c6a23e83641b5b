# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled core of the structured chain sampler.

Mirrors engine_py: a determinantal seam scan (telescoping prefix
determinants) followed by single-sided box conditionals through the suffix.
All determinantal arithmetic runs in C long double: the seam masses span an
exponential range set by the boundary blocks and the weight ratio.
"""

from libc.stdlib cimport malloc, free

import numpy as np
cimport numpy as cnp  # noqa

cnp.import_array()

ctypedef long double ld

cdef extern from "math.h":
    ld fabsl(ld) nogil
    ld powl(ld, ld) nogil
    ld sqrtl(ld) nogil
    double fabs(double) nogil
    double sqrt(double) nogil


cdef ld _det_inplace(ld* a, int n) nogil:
    """Determinant by partial-pivot elimination; clobbers a (n x n, row major)."""
    cdef int i, j, k, p
    cdef ld f, det = 1.0
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if fabsl(a[i * n + k]) > fabsl(a[p * n + k]):
                p = i
        if a[p * n + k] == 0.0:
            return 0.0
        if p != k:
            det = -det
            for j in range(n):
                f = a[k * n + j]; a[k * n + j] = a[p * n + j]; a[p * n + j] = f
        det *= a[k * n + k]
        for i in range(k + 1, n):
            f = a[i * n + k] / a[k * n + k]
            for j in range(k + 1, n):
                a[i * n + j] -= f * a[k * n + j]
    return det


cdef int _pick(ld* mass, int n, double u) nogil:
    """Index into the normalized prefix sums of mass at quantile u."""
    cdef ld tot = 0.0
    cdef int i
    for i in range(n):
        tot += mass[i]
    if not tot > 0.0:
        return -1
    cdef ld target = (<ld> u) * tot
    cdef ld acc = 0.0
    for i in range(n):
        acc += mass[i]
        if acc >= target:
            return i
    return n - 1


cdef double _det_inplace_d(double* a, int n) nogil:
    """Double-precision variant for the orthonormalized step matrices."""
    cdef int i, j, k, p
    cdef double f, det = 1.0
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if fabs(a[i * n + k]) > fabs(a[p * n + k]):
                p = i
        if a[p * n + k] == 0.0:
            return 0.0
        if p != k:
            det = -det
            for j in range(n):
                f = a[k * n + j]; a[k * n + j] = a[p * n + j]; a[p * n + j] = f
        det *= a[k * n + k]
        for i in range(k + 1, n):
            f = a[i * n + k] / a[k * n + k]
            for j in range(k + 1, n):
                a[i * n + j] -= f * a[k * n + j]
    return det


cdef int _pick_d(double* mass, int n, double u) nogil:
    cdef double tot = 0.0
    cdef int i
    for i in range(n):
        tot += mass[i]
    if not tot > 0.0:
        return -1
    cdef double target = u * tot
    cdef double acc = 0.0
    for i in range(n):
        acc += mass[i]
        if acc >= target:
            return i
    return n - 1


cdef int _sample_seam(double* K, int V, int D,
                      double* uni, int* uidx, int* out_sites) nogil:
    """Sequential thinning of the seam correlation kernel (clobbers K)."""
    cdef int w, i, j, taken = 0
    cdef double p, denom
    for w in range(V):
        p = K[w * V + w]
        if p < 0.0:
            p = 0.0
        elif p > 1.0:
            p = 1.0
        if uni[uidx[0]] < p:
            out_sites[taken] = w
            taken += 1
            denom = K[w * V + w]
        else:
            denom = K[w * V + w] - 1.0
            if denom > -1e-12:
                denom = -1e-12
        uidx[0] += 1
        if taken == D:
            return 0
        for i in range(w + 1, V):
            if K[i * V + w] != 0.0:
                p = K[i * V + w] / denom
                for j in range(w + 1, V):
                    K[i * V + j] -= p * K[w * V + j]
    return 1 if taken != D else 0


cdef int _sample_step(int sign, double weight, ld[:, ::1] Phi, int q,
                      int* kappa, int lk, int cap_value,
                      double* uni, int* uidx, int* out, double* work,
                      int* iwork, double* Qbuf) nogil:
    """One suffix step from kappa (lk rows); writes q nonneg parts to out.

    The per-box rows are normalized in extended precision, then the basis
    columns are orthonormalized over the box union and all determinant work
    runs in double precision on the well-conditioned frame.
    """
    cdef double* A = work
    cdef double* Mdet = A + q * q
    cdef double* Mwork = Mdet + q * q
    cdef double* C = Mwork + q * q
    cdef double* f = C + q
    cdef int* lo = iwork
    cdef int* hi = iwork + q
    cdef int j, m, w, i, idx, kj, kjm, kj1
    cdef ld base, fac, smax
    cdef double tot, s
    if sign == 1:  # minus step: nu_j in [kappa_{j+1}, kappa_j]
        base = 1.0 / (<ld> weight)
        for j in range(q):
            kj = kappa[j] if j < lk else 0
            kj1 = kappa[j + 1] if j + 1 < lk else 0
            lo[j] = kj1 + q - (j + 1)
            hi[j] = kj + q - (j + 1)
    else:          # plus step: nu_j in [kappa_j, kappa_{j-1}] (row 1 capped)
        base = <ld> weight
        for j in range(q):
            kj = kappa[j] if j < lk else 0
            if j == 0:
                kjm = cap_value
            else:
                kjm = kappa[j - 1] if j - 1 < lk else 0
            lo[j] = kj + q - (j + 1)
            hi[j] = kjm + q - (j + 1)
    # stack the per-box rows (each box scaled by its own site-scale maximum),
    # then orthonormalize the q columns over the box union: the raw geometric
    # columns are nearly collinear across wide boxes, and a column mixing
    # rescales every determinant by the same constant
    cdef int width = 0
    cdef int bstart, row0
    for j in range(q):
        width += hi[j] - lo[j] + 1
    row0 = 0
    for j in range(q):
        smax = 0.0
        fac = 1.0
        for w in range(hi[j], lo[j] - 1, -1):
            for m in range(q):
                if fabsl(fac * Phi[w, m]) > smax:
                    smax = fabsl(fac * Phi[w, m])
            fac /= base
        if smax <= 0.0:
            smax = 1.0
        fac = 1.0
        for w in range(hi[j], lo[j] - 1, -1):
            for m in range(q):
                Qbuf[(row0 + hi[j] - w) * q + m] = <double> (fac * Phi[w, m] / smax)
            fac /= base
        row0 += hi[j] - lo[j] + 1
    cdef int ipass, mm, rr
    cdef double dot, nrm
    for ipass in range(2):
        for m in range(q):
            for mm in range(m):
                dot = 0.0
                for rr in range(width):
                    dot += Qbuf[rr * q + mm] * Qbuf[rr * q + m]
                for rr in range(width):
                    Qbuf[rr * q + m] -= dot * Qbuf[rr * q + mm]
            nrm = 0.0
            for rr in range(width):
                nrm += Qbuf[rr * q + m] * Qbuf[rr * q + m]
            if not nrm > 0.0:
                return 2
            nrm = sqrt(nrm)
            for rr in range(width):
                Qbuf[rr * q + m] /= nrm
    # box sums into A (rows of Qbuf are ordered top-down within each box)
    row0 = 0
    for j in range(q):
        for m in range(q):
            A[j * q + m] = 0.0
        for rr in range(hi[j] - lo[j] + 1):
            for m in range(q):
                A[j * q + m] += Qbuf[(row0 + rr) * q + m]
        iwork[2 * q + j] = row0          # remember each box's row offset
        row0 += hi[j] - lo[j] + 1
    # sequential rows
    for j in range(q):
        # rows != j equilibrated once; cofactors from unit-row replacements
        for i in range(q * q):
            Mdet[i] = A[i]
        for i in range(q):
            if i == j:
                continue
            s = 0.0
            for m in range(q):
                if fabs(Mdet[i * q + m]) > s:
                    s = fabs(Mdet[i * q + m])
            if s > 0.0:
                for m in range(q):
                    Mdet[i * q + m] /= s
        for m in range(q):
            for i in range(q * q):
                Mwork[i] = Mdet[i]
            for i in range(q):
                Mwork[j * q + i] = 0.0
            Mwork[j * q + m] = 1.0
            C[m] = _det_inplace_d(Mwork, q)
        tot = 0.0
        idx = 0
        bstart = iwork[2 * q + j]
        for w in range(hi[j], lo[j] - 1, -1):
            s = 0.0
            for m in range(q):
                s += Qbuf[(bstart + idx) * q + m] * C[m]
            f[idx] = s
            tot += s
            idx += 1
        if tot < 0.0:
            for i in range(idx):
                f[i] = -f[i]
        for i in range(idx):
            if f[i] < 0.0:
                f[i] = 0.0
        i = _pick_d(f, idx, uni[uidx[0]])
        uidx[0] += 1
        if i < 0:
            return 1
        w = hi[j] - i
        out[j] = w - (q - (j + 1))
        # pin the chosen row in the orthonormalized frame
        for m in range(q):
            A[j * q + m] = Qbuf[(bstart + (hi[j] - w)) * q + m]
    return 0


cdef int _sample_step_ld(int sign, double weight, ld[:, ::1] Phi, int q,
                      int* kappa, int lk, int cap_value,
                      double* uni, int* uidx, int* out, ld* work,
                      int* iwork, ld* Qbuf) nogil:
    """One suffix step from kappa (lk rows); writes q nonneg parts to out.

    The per-box rows are normalized in extended precision, then the basis
    columns are orthonormalized over the box union and all determinant work
    runs in double precision on the well-conditioned frame.
    """
    cdef ld* A = work
    cdef ld* Mdet = A + q * q
    cdef ld* Mwork = Mdet + q * q
    cdef ld* C = Mwork + q * q
    cdef ld* f = C + q
    cdef int* lo = iwork
    cdef int* hi = iwork + q
    cdef int j, m, w, i, idx, kj, kjm, kj1
    cdef ld base, fac, smax
    cdef ld tot, s
    if sign == 1:  # minus step: nu_j in [kappa_{j+1}, kappa_j]
        base = 1.0 / (<ld> weight)
        for j in range(q):
            kj = kappa[j] if j < lk else 0
            kj1 = kappa[j + 1] if j + 1 < lk else 0
            lo[j] = kj1 + q - (j + 1)
            hi[j] = kj + q - (j + 1)
    else:          # plus step: nu_j in [kappa_j, kappa_{j-1}] (row 1 capped)
        base = <ld> weight
        for j in range(q):
            kj = kappa[j] if j < lk else 0
            if j == 0:
                kjm = cap_value
            else:
                kjm = kappa[j - 1] if j - 1 < lk else 0
            lo[j] = kj + q - (j + 1)
            hi[j] = kjm + q - (j + 1)
    # stack the per-box rows (each box scaled by its own site-scale maximum),
    # then orthonormalize the q columns over the box union: the raw geometric
    # columns are nearly collinear across wide boxes, and a column mixing
    # rescales every determinant by the same constant
    cdef int width = 0
    cdef int bstart, row0
    for j in range(q):
        width += hi[j] - lo[j] + 1
    row0 = 0
    for j in range(q):
        smax = 0.0
        fac = 1.0
        for w in range(hi[j], lo[j] - 1, -1):
            for m in range(q):
                if fabsl(fac * Phi[w, m]) > smax:
                    smax = fabsl(fac * Phi[w, m])
            fac /= base
        if smax <= 0.0:
            smax = 1.0
        fac = 1.0
        for w in range(hi[j], lo[j] - 1, -1):
            for m in range(q):
                Qbuf[(row0 + hi[j] - w) * q + m] = fac * Phi[w, m] / smax
            fac /= base
        row0 += hi[j] - lo[j] + 1
    cdef int ipass, mm, rr
    cdef ld dot, nrm
    for ipass in range(2):
        for m in range(q):
            for mm in range(m):
                dot = 0.0
                for rr in range(width):
                    dot += Qbuf[rr * q + mm] * Qbuf[rr * q + m]
                for rr in range(width):
                    Qbuf[rr * q + m] -= dot * Qbuf[rr * q + mm]
            nrm = 0.0
            for rr in range(width):
                nrm += Qbuf[rr * q + m] * Qbuf[rr * q + m]
            if not nrm > 0.0:
                return 2
            nrm = sqrtl(nrm)
            for rr in range(width):
                Qbuf[rr * q + m] /= nrm
    # box sums into A (rows of Qbuf are ordered top-down within each box)
    row0 = 0
    for j in range(q):
        for m in range(q):
            A[j * q + m] = 0.0
        for rr in range(hi[j] - lo[j] + 1):
            for m in range(q):
                A[j * q + m] += Qbuf[(row0 + rr) * q + m]
        iwork[2 * q + j] = row0          # remember each box's row offset
        row0 += hi[j] - lo[j] + 1
    # sequential rows
    for j in range(q):
        # rows != j equilibrated once; cofactors from unit-row replacements
        for i in range(q * q):
            Mdet[i] = A[i]
        for i in range(q):
            if i == j:
                continue
            s = 0.0
            for m in range(q):
                if fabsl(Mdet[i * q + m]) > s:
                    s = fabs(Mdet[i * q + m])
            if s > 0.0:
                for m in range(q):
                    Mdet[i * q + m] /= s
        for m in range(q):
            for i in range(q * q):
                Mwork[i] = Mdet[i]
            for i in range(q):
                Mwork[j * q + i] = 0.0
            Mwork[j * q + m] = 1.0
            C[m] = _det_inplace(Mwork, q)
        tot = 0.0
        idx = 0
        bstart = iwork[2 * q + j]
        for w in range(hi[j], lo[j] - 1, -1):
            s = 0.0
            for m in range(q):
                s += Qbuf[(bstart + idx) * q + m] * C[m]
            f[idx] = s
            tot += s
            idx += 1
        if tot < 0.0:
            for i in range(idx):
                f[i] = -f[i]
        for i in range(idx):
            if f[i] < 0.0:
                f[i] = 0.0
        i = _pick(f, idx, uni[uidx[0]])
        uidx[0] += 1
        if i < 0:
            return 1
        w = hi[j] - i
        out[j] = w - (q - (j + 1))
        # pin the chosen row in the orthonormalized frame
        for m in range(q):
            A[j * q + m] = Qbuf[(bstart + (hi[j] - w)) * q + m]
    return 0



def sample_batch(plan_pack, int n, object rng):
    """Sample n packed chains; returns int32 array (n, ncols, D)."""
    cdef double[:, ::1] Kseam = plan_pack["K"]
    cdef int D = plan_pack["D"]
    cdef int V = plan_pack["V"]
    cdef int n_det = plan_pack["n_det"]
    cdef int site_lo = plan_pack["site_lo"]
    cdef int cap_value = plan_pack["cap_value"]
    cdef int seam_trivial = 1 if plan_pack["seam_trivial"] else 0
    cdef cnp.int8_t[::1] signs = plan_pack["signs"]
    cdef double[::1] weights = plan_pack["weights"]
    cdef cnp.int32_t[::1] qafter = plan_pack["qafter"]
    bases = plan_pack["bases"]          # list of 2-D longdouble arrays per step
    cdef int ns = signs.shape[0]
    cdef int ncols = ns + 1
    out_arr = np.zeros((n, ncols, D), dtype=np.int32)
    cdef cnp.int32_t[:, :, ::1] out = out_arr
    cdef int st
    # uniforms: one per seam site + one per row per step (upper bound)
    cdef int per_chain = V + 2
    for st in range(ns):
        per_chain += qafter[st] + 1
    uni_arr = None
    cdef double[::1] uni
    cdef int uidx
    cdef int wlen = V * V + 8
    cdef double* work = <double*> malloc(sizeof(double) * wlen)
    cdef int stepw = (3 * D * D + 2 * D + cap_value + 6 * D + 24)
    cdef double* swork = <double*> malloc(sizeof(double) * stepw)
    cdef double* qbuf = <double*> malloc(sizeof(double) * (cap_value + 4 * D + 16) * D)
    cdef ld* sworkl = <ld*> malloc(sizeof(ld) * stepw)
    cdef ld* qbufl = <ld*> malloc(sizeof(ld) * (cap_value + 4 * D + 16) * D)
    cdef int* siwork = <int*> malloc(sizeof(int) * (3 * D + 8))
    cdef int* kappa = <int*> malloc(sizeof(int) * (D + 2))
    cdef int* nu = <int*> malloc(sizeof(int) * (D + 2))
    cdef int* sites = <int*> malloc(sizeof(int) * (D + 2))
    if work == NULL or swork == NULL or qbuf == NULL or siwork == NULL or \
            sworkl == NULL or qbufl == NULL or \
            kappa == NULL or nu == NULL or sites == NULL:
        raise MemoryError
    cdef int s, c, j, lk, q, rc, w, u0
    cdef ld[:, ::1] Phi
    try:
        for s in range(n):
            uni_arr = rng.random(per_chain)
            uni = uni_arr
            uidx = 0
            lk = 0
            if not seam_trivial:
                for j in range(V):
                    for c in range(V):
                        work[j * V + c] = Kseam[j, c]
                rc = _sample_seam(work, V, D, &uni[0], &uidx, sites)
                if rc != 0:
                    raise ArithmeticError("seam thinning failed (code %d)" % rc)
                # chosen sites ascend; row j takes the (D - j)-th largest
                for j in range(D):
                    w = sites[D - 1 - j] + site_lo
                    c = w - (n_det - (j + 1))
                    if c > 0:
                        kappa[lk] = c
                        lk += 1
                    elif c < 0:
                        raise ArithmeticError("negative seam part")
            for j in range(lk):
                out[s, 0, j] = kappa[j]
            for st in range(ns):
                q = qafter[st]
                if q == 0:
                    lk = 0
                else:
                    Phi = bases[st]
                    u0 = uidx
                    rc = _sample_step(1 if signs[st] else 0, weights[st], Phi,
                                      q, kappa, lk, cap_value,
                                      &uni[0], &uidx, nu, swork, siwork, qbuf)
                    if rc != 0:
                        # retry the step in extended precision (rare tails)
                        uidx = u0
                        rc = _sample_step_ld(1 if signs[st] else 0, weights[st],
                                             Phi, q, kappa, lk, cap_value,
                                             &uni[0], &uidx, nu, sworkl,
                                             siwork, qbufl)
                    if rc != 0:
                        raise ArithmeticError("step scan failed at %d" % st)
                    lk = 0
                    for j in range(q):
                        if nu[j] > 0:
                            kappa[lk] = nu[j]
                            lk += 1
                        elif nu[j] < 0:
                            raise ArithmeticError("negative part in step %d" % st)
                for j in range(lk):
                    out[s, st + 1, j] = kappa[j]
    finally:
        free(work); free(swork); free(qbuf); free(sworkl); free(qbufl); free(siwork); free(kappa); free(nu); free(sites)
    return out_arr


class EngineC:
    backend = "compiled"

    def __init__(self, plan):
        self.plan = plan
        signs = np.array([1 if s == "-" else 0 for s, _w, _i in plan.suffix],
                         dtype=np.int8)
        weights = np.array([w for _s, w, _i in plan.suffix], dtype=np.float64)
        qafter = np.array([len(ms) for ms in plan.minus_after], dtype=np.int32)
        bases = [np.ascontiguousarray(plan.bases[ms], dtype=np.longdouble)
                 for ms in plan.minus_after]
        V = plan.V
        kseam = plan.Kseam if not plan.seam_trivial else np.zeros((V, V))
        self._pack = {
            "K": np.ascontiguousarray(kseam, dtype=np.float64),
            "D": plan.D, "V": plan.V, "n_det": plan.n_det,
            "site_lo": plan.site_lo, "cap_value": plan.cap_value,
            "seam_trivial": plan.seam_trivial,
            "signs": signs, "weights": weights, "qafter": qafter,
            "bases": bases,
        }

    def sample_many(self, n, seed, replica=0):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replica,)))
        return sample_batch(self._pack, n, rng)
