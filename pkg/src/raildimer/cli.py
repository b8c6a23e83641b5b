"""Command-line batch runner: model files in, CSV and verification reports out.

Subcommands: pf, sample, verify, moments, gue, bench.
Exit codes: 0 pass, 1 verification failure, 2 configuration error.
"""

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .model import (
    RailYardModel, partition_function, product_formula, HypothesisError,
    enumerate_coverings, sample_weight, charge,
)
from .fock import DivergenceError, TableSampler, default_truncation
from .partitions import format_partition


def _config_hash(payload):
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _header(fh, config, seed, t0):
    fh.write("# raildimer %s\n" % __version__)
    fh.write("# config_hash %s\n" % _config_hash(config))
    fh.write("# seed %s\n" % seed)
    fh.write("# walltime_s %.3f\n" % (time.time() - t0))


def cmd_pf(args):
    model = RailYardModel.load(args.model)
    try:
        z = partition_function(model)
    except DivergenceError as e:
        print("divergent model: %s" % e)
        return 1
    print("partition_function %s (= %.12g)" % (z, float(z)))
    try:
        p = product_formula(model)
    except HypothesisError as e:
        print("product_formula skipped: %s" % e)
        return 0
    print("product_formula    %s (= %.12g)" % (p, float(p)))
    if p != z:
        print("MISMATCH between the transfer value and the closed form")
        return 1
    print("match: OK")
    return 0


def cmd_sample(args):
    t0 = time.time()
    model = RailYardModel.load(args.model)
    from . import fastsamp
    config = {"model": model.to_dict(), "n": args.n, "seed": args.seed,
              "mode": args.mode, "threads": args.threads}
    use_fast = args.mode == "float" and fastsamp.is_structured(model)
    rows = []
    if use_fast:
        chains = fastsamp.sample_chains(model, args.n, args.seed,
                                        threads=args.threads)
        eng = fastsamp.make_engine(model)
        start_col = eng.plan.seam_col
        for srow in chains:
            rows.append([format_partition(tuple(int(v) for v in col if v))
                         for col in srow])
        colnames = list(range(start_col, model.r + 2))
    else:
        sampler = TableSampler(model, seed=args.seed)
        for s in sampler.sample_many(args.n, seed=args.seed):
            rows.append([format_partition(p) for p in s.partitions])
        start_col = model.l
        colnames = list(range(model.l, model.r + 2))
    out = args.out or "samples.csv"
    with open(out, "w") as fh:
        _header(fh, config, args.seed, t0)
        fh.write("sample," + ",".join("col%d" % c for c in colnames) + "\n")
        for i, row in enumerate(rows):
            fh.write(str(i) + "," + ",".join('"%s"' % p for p in row) + "\n")
    dt = time.time() - t0
    print("wrote %d chains to %s (%.1f chains/s, columns %d..%d)" %
          (len(rows), out, len(rows) / max(dt, 1e-9), colnames[0], colnames[-1]))
    return 0


def _verify_commutation():
    from .fock import verify_commutation, TruncationPolicy
    ok = True
    lines = []
    for a1 in "LR":
        for a2 in "LR":
            rep = verify_commutation(a1 + "+", a2 + "-", Fraction(1, 3),
                                     Fraction(1, 2), TruncationPolicy(14, 14))
            ok &= rep["ok"]
            lines.append(("commutation %s+/%s-" % (a1, a2), rep["ok"],
                          "max discrepancy %s <= tail %s" %
                          (float(rep["max_discrepancy"]), float(rep["tail_bound"]))))
    return ok, lines


def _verify_coset_schur():
    from .partitions import partitions_up_to_size
    from .symfunc import PointMultiset, schur_coset_formula, schur
    pm = PointMultiset((Fraction(1, 2), Fraction(2)), (2, 1))
    ok = True
    count = 0
    for lam in partitions_up_to_size(6):
        if len(lam) > pm.N:
            continue
        ok &= schur_coset_formula(lam, pm) == schur(lam, pm.expanded())
        count += 1
    return ok, [("coset-schur (%d shapes)" % count, ok, "exact equality")]


def _verify_l212():
    from .partitions import partitions_up_to_size
    from .symfunc import schur
    points = (Fraction(1, 2), Fraction(2))
    ok = True
    for lam in partitions_up_to_size(6):
        if len(lam) > len(points):
            continue
        for b in (1, 2):
            padded = points + (Fraction(0),) * b
            val = schur(lam, padded)
            a = len(padded) - len(lam)
            if a < b:
                ok &= val == 0
            else:
                ok &= val == schur(lam, points)
    return ok, [("zero-padding identities", ok, "exact equality")]


def _verify_charge(seed=11):
    from .model import DimerSample
    model = RailYardModel(1, 4, "LRRL", "++--", [Fraction(1, 4)] * 4)
    sampler = TableSampler(model, seed=seed)
    ok = True
    for s in sampler.sample_many(500, seed=seed):
        vals = {charge(s, m) for m in s.column_range()}
        ok &= len(vals) == 1
    return ok, [("charge constancy (500 chains)", ok, "constant across columns")]


def _verify_hciz(seed=3):
    from .gue import hciz_check
    cases = [((1,), 2, [0.3, -0.2]), ((2, 1), 2, [0.5, 0.1]),
             ((), 3, [0.2, 0.0, -0.4])]
    ok = True
    lines = []
    for lam, N, a in cases:
        rep = hciz_check(lam, N, a, mc_samples=100_000, seed=seed)
        good = abs(rep["z"]) < 3
        ok &= good
        lines.append(("hciz N=%d lam=%s" % (N, lam), good, "z=%.2f" % rep["z"]))
    return ok, lines


def _verify_bands(fixture="default"):
    from .sgf import WeightClasses, PiecewiseBoundary
    from .gue import class_limit_bands, rescaling_constants, limit_measure_moments
    boundary = (9, 9, 4, 4, 4) if fixture == "default" else (3, 3, 3, 3, 3)
    weights = [Fraction(1, 2)] * 2 + [Fraction(1, 8)] * 3
    n = len(boundary)
    model = RailYardModel(0, n - 1, "L" * n, "-" * n, weights,
                          left_boundary=boundary)
    wc = WeightClasses(model)
    pb = PiecewiseBoundary(boundary, n)
    ok = True
    lines = []
    try:
        for h in range(1, wc.n + 1):
            bands = class_limit_bands(pb, wc, h)
            ok &= bands.total_length() == 1
        lines.append(("band bookkeeping", ok, "disjoint, ordered, total length 1"))
    except ValueError as e:
        return False, [("band bookkeeping", False, str(e))]
    c = rescaling_constants(model, -1, 2, (Fraction(1, 2), Fraction(1, 3)))
    good = c.A == 0 and c.B == Fraction(1, 12)
    ok &= good
    lines.append(("empty-boundary class constants", good, "(A,B)=(0,1/12)"))
    return ok, lines


SUITES = {
    "commutation": _verify_commutation,
    "coset-schur": _verify_coset_schur,
    "l212": _verify_l212,
    "charge": _verify_charge,
    "hciz": _verify_hciz,
    "bands": _verify_bands,
}


def cmd_verify(args):
    names = args.suite or list(SUITES)
    bad = [n for n in names if n not in SUITES]
    if bad:
        print("unknown suite(s): %s" % ", ".join(bad))
        return 2
    all_ok = True
    for name in names:
        fn = SUITES[name]
        if name == "bands" and args.fixture:
            ok, lines = fn(fixture=args.fixture)
        else:
            ok, lines = fn()
        all_ok &= ok
        for label, good, detail in lines:
            print("%-4s %-35s %s" % ("PASS" if good else "FAIL", label, detail))
    return 0 if all_ok else 1


def cmd_moments(args):
    from .sgf import (difference_operator_moments, OperatorSpec,
                      exact_full_moment, exact_block_moment, WeightClasses)
    t0 = time.time()
    with open(args.config) as fh:
        cfg = json.load(fh)
    model = RailYardModel.from_dict(cfg["model"]) if "model" in cfg \
        else RailYardModel.load(cfg["model_path"])
    t = cfg["t"]
    rows = []
    for op in cfg["operators"]:
        spec = OperatorSpec(op["k"], h=op.get("class"), power=op.get("power", 1))
        val, err = difference_operator_moments(
            model, t, [spec],
            rel_tol=Fraction(cfg.get("tolerance", "1/100000")))
        oracle = ""
        if cfg.get("oracle", True):
            try:
                if spec.h is None:
                    oracle = float(exact_full_moment(model, t, spec.k, spec.power))
                else:
                    oracle = float(exact_block_moment(model, t, spec.h, spec.k))
            except Exception:
                oracle = ""
        rows.append((spec.h, spec.k, spec.power, val, err, oracle))
    out = args.out or "moments.csv"
    with open(out, "w") as fh:
        _header(fh, cfg, cfg.get("seed", 0), t0)
        fh.write("class,k,power,value,fd_error,oracle\n")
        for r in rows:
            fh.write(",".join("" if v == "" else str(v) for v in r) + "\n")
    print("wrote %d moments to %s" % (len(rows), out))
    return 0


def cmd_gue(args):
    from .experiments import run_gue_ladder, ladder_verdict
    t0 = time.time()
    sizes = tuple(int(s) for s in args.sizes.split(","))
    config = {"sizes": sizes, "samples": args.n, "seed": args.seed,
              "k": args.k, "ratio": args.ratio}
    res = run_gue_ladder(sizes=sizes, samples=args.n, seed=args.seed,
                         threads=args.threads, ratio=args.ratio, k=args.k,
                         reference_n=args.reference_n)
    out = args.out or "gue_ladder.csv"
    with open(out, "w") as fh:
        _header(fh, config, args.seed, t0)
        fh.write("N,class,coord,ks_B,ks_sqrtB,mean_err,cov_err,samples,seconds\n")
        for row in res["rows"]:
            for h in (1, 2):
                rep = row["reports"][h]
                for i in range(rep.k):
                    fh.write("%d,%d,%d,%.6f,%.6f,%.6f,%.6f,%d,%.1f\n" % (
                        row["N"], h, i + 1, rep.ks_B[i], rep.ks_sqrtB[i],
                        rep.mean_err[i], rep.cov_err, rep.n_samples,
                        row["seconds"]))
    verdict = ladder_verdict(res)
    print("KS(best norm) by size:", ["%.4f" % v for v in verdict["ks_by_size"]])
    print("cross-class corr at N=%d: %.4f" % (max(sizes), res["cross_class_corr"]))
    print("monotone: %s, final < 0.08: %s" % (verdict["monotone"], verdict["final_ok"]))
    print("wrote %s" % out)
    return 0 if verdict["ok"] else 1


def cmd_bench(args):
    from . import fastsamp
    from .experiments import ladder_model, pure_reference_model
    if args.variant == "ladder":
        model, _info = ladder_model(args.size)
    else:
        model, _info = pure_reference_model(args.size)
    results = {}
    for backend in ("compiled", "python"):
        if backend == "compiled" and not fastsamp.HAVE_COMPILED:
            print("compiled backend unavailable; skipping")
            continue
        n = args.n if backend == "compiled" else max(args.n // 20, 20)
        t0 = time.time()
        fastsamp.sample_chains(model, n, args.seed, threads=args.threads,
                               backend=backend)
        dt = time.time() - t0
        results[backend] = n / dt
        print("%-9s %8.1f chains/s  (%d chains, %d threads)" %
              (backend, n / dt, n, args.threads))
    if "compiled" in results and "python" in results:
        print("speedup: %.1fx" % (results["compiled"] / results["python"]))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="raildimer", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("pf", help="exact partition function + closed-form cross-check")
    p.add_argument("--model", required=True)
    p.set_defaults(fn=cmd_pf)

    p = sub.add_parser("sample", help="sample covering chains to CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--mode", choices=["exact", "float"], default="float")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("verify", help="run named invariant suites")
    p.add_argument("--suite", action="append",
                   help="one of: %s (repeatable; default all)" % ", ".join(SUITES))
    p.add_argument("--fixture", help="alternate fixture name for the bands suite")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("moments", help="difference-operator moments from a descriptor")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_moments)

    p = sub.add_parser("gue", help="size-ladder GUE comparison experiment")
    p.add_argument("--sizes", default="24,48,96")
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--seed", type=int, default=20240918)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--ratio", type=int, default=8)
    p.add_argument("--reference-n", type=int, default=1_000_000)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gue)

    p = sub.add_parser("bench", help="benchmark compiled vs pure sampling")
    p.add_argument("--size", type=int, default=48)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--variant", choices=["ladder", "pure"], default="ladder")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print("configuration error: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
