"""Pure-Python (numpy) reference engine for the structured chain sampler.

The compiled core mirrors this logic; this version is the fallback and the
readable specification of the algorithm.  All determinantal arithmetic runs
in extended precision (numpy longdouble): the seam masses span an
exponential range set by the boundary blocks and the weight ratio.
"""

import numpy as np

from ..partitions import normalize, part

LD = np.longdouble


def batched_det_ld(mats):
    """Determinants of a (n, m, m) longdouble stack by pivoted elimination."""
    a = np.array(mats, dtype=LD, copy=True)
    n, m, _ = a.shape
    det = np.ones(n, dtype=LD)
    rows = np.arange(n)
    for k in range(m):
        piv = np.argmax(np.abs(a[:, k:, k]), axis=1) + k
        swapped = piv != k
        pr = a[rows, piv, :].copy()
        a[rows, piv, :] = a[:, k, :]
        a[:, k, :] = pr
        det *= np.where(swapped, -1.0, 1.0) * a[:, k, k]
        pivval = np.where(a[:, k, k] != 0, a[:, k, k], 1.0)
        f = a[:, k + 1:, k] / pivval[:, None]
        a[:, k + 1:, k:] -= f[:, :, None] * a[:, None, k, k:]
    return det


class EnginePy:
    backend = "python"

    def __init__(self, plan):
        self.plan = plan

    # ------------------------------------------------------------------ seam
    def _sample_seam(self, rng):
        """Sequential thinning of the exact seam correlation kernel."""
        plan = self.plan
        if plan.seam_trivial:
            return ()
        D, V = plan.D, plan.V
        K = plan.Kseam.copy()
        chosen = []
        for w in range(V):
            p = min(max(K[w, w], 0.0), 1.0)
            take = rng.random() < p
            if take:
                chosen.append(w)
                denom = K[w, w]
            else:
                denom = K[w, w] - 1.0
                if abs(denom) < 1e-12:
                    denom = -1e-12
            if w + 1 < V:
                K[w + 1:, w + 1:] -= np.outer(K[w + 1:, w], K[w, w + 1:]) / denom
            if len(chosen) == D:
                break
        if len(chosen) != D:
            raise ArithmeticError("seam thinning selected %d of %d particles"
                                  % (len(chosen), D))
        nd = plan.n_det
        mu = []
        for j, vidx in enumerate(reversed(chosen), start=1):
            mu.append(vidx + plan.site_lo - (nd - j))
        return normalize(mu)

    # ----------------------------------------------------------------- steps
    def _boxes(self, kappa, sign, q):
        """Site boxes [lo, hi] per row for the next partition."""
        boxes = []
        if sign == "-":
            for j in range(1, q + 1):
                lo = part(kappa, j + 1) + q - j
                hi = part(kappa, j) + q - j
                boxes.append((lo, hi))
        else:
            for j in range(1, q + 1):
                lo = part(kappa, j) + q - j
                hi = (self.plan.cap_value if j == 1 else part(kappa, j - 1)) + q - j
                boxes.append((lo, hi))
        return boxes

    def _step(self, kappa, sign, weight, ms_after, rng):
        plan = self.plan
        q = len(ms_after)
        if q == 0:
            # no minus columns remain: the chain is pinned at the vacuum
            return ()
        Phi = plan.bases[ms_after]            # (wmax+1) x q, longdouble
        boxes = self._boxes(kappa, sign, q)
        base = LD(weight) if sign == "+" else 1.0 / LD(weight)
        blocks = []
        for lo, hi in boxes:
            w = np.arange(lo, hi + 1)
            f = np.power(base, (w - hi).astype(LD))
            block = Phi[lo:hi + 1, :] * f[:, None]
            # per-row normalization: each box lives at its own site scale
            rmax = np.abs(block).max()
            blocks.append(block / (rmax if rmax > 0 else LD(1.0)))
        # orthonormalize the basis columns over the box union (column mixing
        # rescales every determinant by the same constant): the raw geometric
        # columns are nearly collinear across wide boxes
        S = np.vstack(blocks)
        widths = [hi - lo + 1 for lo, hi in boxes]
        offs = np.concatenate([[0], np.cumsum(widths)])
        chosen_w = []
        for j in range(q):
            qc = q - j
            seg = S[offs[j]:offs[q], :]
            # re-orthonormalize the remaining columns over the remaining boxes
            for _pass in range(2):
                for m in range(seg.shape[1]):
                    for mm in range(m):
                        seg[:, m] -= (seg[:, mm] @ seg[:, m]) * seg[:, mm]
                    nrm = np.sqrt((seg[:, m] ** 2).sum())
                    if not (nrm > 0):
                        raise ArithmeticError("degenerate step basis")
                    seg[:, m] /= nrm
            qc = seg.shape[1]
            # cofactors of the current row against the lower box sums
            rest = np.array([seg[offs[jj] - offs[j]:offs[jj + 1] - offs[j], :].sum(axis=0)
                             for jj in range(j + 1, q)])   # (qc-1) x qc
            if qc == 1:
                cof = np.ones(1, dtype=LD)
            else:
                stack = np.zeros((qc, qc, qc), dtype=LD)
                for mcol in range(qc):
                    stack[mcol, 0, mcol] = 1.0
                    stack[mcol, 1:, :] = rest
                cof = batched_det_ld(stack)
            blockj = seg[:offs[j + 1] - offs[j], :]
            f = blockj @ cof
            sgn = 1.0 if f.sum() >= 0 else -1.0
            f = np.clip(f * sgn, LD(0.0), None)
            tot = f.sum()
            if not (tot > 0):
                raise ArithmeticError("step scan produced no admissible mass")
            idx = int(np.searchsorted(np.cumsum(f), rng.random() * tot,
                                      side="right"))
            idx = min(idx, len(f) - 1)
            lo, _hi = boxes[j]
            chosen_w.append(lo + idx)
            # eliminate the chosen row's direction from the remaining columns
            if j < q - 1:
                v = blockj[idx, :].copy()
                mstar = int(np.argmax(np.abs(v)))
                if v[mstar] == 0:
                    raise ArithmeticError("vanishing pivot in the step reduction")
                rest_rows = S[offs[j + 1]:offs[q], :]
                coeff = v / v[mstar]
                update = np.outer(rest_rows[:, mstar], coeff)
                rest_rows -= update
                keep = [m for m in range(S.shape[1]) if m != mstar]
                S = S[:, keep]
        nu = [w - (q - jj) for jj, w in enumerate(chosen_w, start=1)]
        return normalize(nu)

    # ------------------------------------------------------------------ chain
    def sample_chain(self, rng):
        """Partitions along the suffix window: seam column .. r+1."""
        plan = self.plan
        kappa = self._sample_seam(rng)
        parts = [kappa]
        for (sign, w, _col), ms_after in zip(plan.suffix, plan.minus_after):
            kappa = self._step(kappa, sign, w, ms_after, rng)
            parts.append(kappa)
        if kappa != ():
            raise AssertionError("chain did not terminate at the empty partition")
        return parts

    def sample_many(self, n, seed, replica=0):
        """Packed chains: int32 array (n, n_columns, D), rows zero-padded."""
        plan = self.plan
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replica,)))
        ncols = len(plan.suffix) + 1
        out = np.zeros((n, ncols, plan.D), dtype=np.int32)
        for s in range(n):
            for c, lam in enumerate(self.sample_chain(rng)):
                out[s, c, :len(lam)] = lam
        return out
