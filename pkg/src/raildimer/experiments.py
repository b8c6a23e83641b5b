"""Reference models and the size-ladder convergence experiment."""

import math
import time
from fractions import Fraction

import numpy as np

from .model import RailYardModel
from .partitions import part
from .sgf import WeightClasses
from . import gue
from . import fastsamp

F = Fraction


def ladder_model(n_lminus, ratio=8, hi=F(1, 2), plus_weight=F(2, 3),
                 k=3, plus_columns=None):
    """Two-weight-class reference instance at a given (L,-) column count.

    Boundary: two blocks (s = 2), the top one paired with the heavy class.
    Columns: heavy and light minus bulk, a plus block, then k light and k
    heavy minus tail columns; the measured partition sits right after the
    plus block and carries k coordinates per class.
    """
    if n_lminus % 2 or n_lminus < 2 * k:
        raise ValueError("need an even (L,-) count of at least 2k")
    n1 = n2 = n_lminus // 2
    lo = hi / ratio
    if plus_columns is None:
        plus_columns = n_lminus
    mu1, mu2 = 2 * n_lminus, max(n_lminus // 2, 1)
    boundary = (mu1,) * n1 + (mu2,) * n2
    weights = [hi] * (n1 - k) + [lo] * (n2 - k)
    signs = ["-"] * (n1 - k + n2 - k)
    weights += [plus_weight] * plus_columns
    signs += ["+"] * plus_columns
    weights += [lo] * k + [hi] * k
    signs += ["-"] * 2 * k
    n = len(weights)
    model = RailYardModel(0, n - 1, "L" * n, "".join(signs), weights,
                          left_boundary=boundary)
    t_star = (n1 - k) + (n2 - k) + plus_columns - 1   # last plus column
    info = {
        "n_lminus": n_lminus, "k": k, "ratio": ratio,
        "t_star": t_star, "measure_col": t_star + 1,
        "class_sizes": (n1, n2), "mu": (mu1, mu2),
    }
    return model, info


def pure_reference_model(n_lminus=48, hi=F(1, 2), ratio=8, plus_weight=F(2, 3), k=3):
    """Empty-boundary member of the same family (full chains from column l)."""
    model, info = ladder_model(n_lminus, ratio=ratio, hi=hi,
                               plus_weight=plus_weight, k=k)
    stripped = RailYardModel(model.l, model.r, model.lr_seq, model.sign_seq,
                             model.weights, left_boundary=())
    return stripped, info


def ladder_constants(model, info, h):
    """Finite-mode rescaling constants for class h of a ladder instance."""
    wc = WeightClasses(model)
    psi = gue.limit_measure_moments(None, wc, h, mode="finite")
    return gue.rescaling_constants(model, info["t_star"], h, psi)


def block_rows_from_chains(chains, plan_seam_col, measure_col, offset, k):
    """(n_samples x k) block coordinates at the measure column."""
    idx = measure_col - plan_seam_col
    return np.asarray(chains[:, idx, offset:offset + k], dtype=np.int64)


def run_gue_ladder(sizes=(24, 48, 96), samples=20_000, seed=20240918,
                   threads=1, backend="auto", ratio=8, k=3,
                   reference_n=1_000_000):
    """The convergence experiment: per size, KS distances of both classes.

    Returns a dict with per-size reports and the cross-class correlation at
    the largest size.
    """
    rows = []
    corr = None
    for N in sizes:
        model, info = ladder_model(N, ratio=ratio, k=k)
        eng = fastsamp.make_engine(model, backend=backend)
        t0 = time.time()
        chains = fastsamp.sample_chains(model, samples, seed + N,
                                        threads=threads, backend=backend)
        dt = time.time() - t0
        wc = WeightClasses(model)
        reports = {}
        tops = {}
        for h in (1, 2):
            const = ladder_constants(model, info, h)
            offset = (h - 1) * k
            block = block_rows_from_chains(chains, eng.plan.seam_col,
                                           info["measure_col"], offset, k)
            n_class = wc.class_size(h)
            rep = gue.gue_compare(block, n_class, k, const,
                                  reference_n=reference_n)
            reports[h] = rep
            _bB, b_sB = gue.rescaled_block_coordinates(block, n_class, k, const)
            tops[h] = b_sB[:, 0]
        if N == max(sizes):
            t1, t2 = tops[1], tops[2]
            if t1.std() > 0 and t2.std() > 0:
                corr = float(np.corrcoef(t1, t2)[0, 1])
            else:
                corr = 0.0
        rows.append({"N": N, "samples": samples, "seconds": dt,
                     "reports": reports, "info": info})
    return {"rows": rows, "cross_class_corr": corr, "sizes": tuple(sizes),
            "k": k, "ratio": ratio, "seed": seed}


def ladder_verdict(result, noise_band=0.01, final_ks=0.08):
    """Acceptance reading of the ladder: monotone KS within the band, small end."""
    ks_by_size = []
    for row in result["rows"]:
        rep = row["reports"][1]
        ks_by_size.append(rep.best_ks())
    monotone = all(b <= a + noise_band for a, b in zip(ks_by_size, ks_by_size[1:]))
    final_ok = ks_by_size[-1] < final_ks
    return {"ks_by_size": ks_by_size, "monotone": monotone,
            "final_ok": final_ok, "ok": monotone and final_ok}
