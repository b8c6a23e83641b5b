"""Structured chain sampler: compiled core with a pure-Python fallback.

Set RAILDIMER_PURE=1 to force the fallback.
"""

import os

from .plan import StructuredPlan
from .engine_py import EnginePy

_FORCE_PURE = os.environ.get("RAILDIMER_PURE", "") not in ("", "0")

try:
    if _FORCE_PURE:
        raise ImportError("pure backend forced")
    from ._engine import EngineC
    DEFAULT_ENGINE = EngineC
    HAVE_COMPILED = True
except ImportError:
    DEFAULT_ENGINE = EnginePy
    HAVE_COMPILED = False


def make_engine(model, backend="auto", slack=48):
    plan = StructuredPlan(model, slack=slack)
    if backend == "auto":
        return DEFAULT_ENGINE(plan)
    if backend == "python":
        return EnginePy(plan)
    if backend == "compiled":
        from ._engine import EngineC
        return EngineC(plan)
    raise ValueError("backend must be auto|python|compiled")


def is_structured(model):
    try:
        StructuredPlan(model)
        return True
    except ValueError:
        return False


def sample_block(args):
    """Worker entry point: (model_dict, backend, n, seed, replica, slack)."""
    from ..model import RailYardModel
    model_dict, backend, n, seed, replica, slack = args
    model = RailYardModel.from_dict(model_dict)
    eng = make_engine(model, backend=backend, slack=slack)
    return eng.sample_many(n, seed, replica=replica)


def sample_chains(model, n, seed, threads=1, backend="auto", slack=48):
    """n packed suffix chains; deterministic given (seed, threads, backend)."""
    import numpy as np
    if threads <= 1:
        return make_engine(model, backend=backend, slack=slack).sample_many(n, seed)
    from concurrent.futures import ProcessPoolExecutor
    per = [n // threads + (1 if i < n % threads else 0) for i in range(threads)]
    jobs = [(model.to_dict(), backend, per[i], seed, i, slack)
            for i in range(threads) if per[i]]
    chunks = []
    with ProcessPoolExecutor(max_workers=threads) as ex:
        for chunk in ex.map(sample_block, jobs):
            chunks.append(chunk)
    return np.concatenate(chunks, axis=0)


def packed_to_partitions(row):
    """One packed chain (n_columns, D) back to a list of partition tuples."""
    out = []
    for col in row:
        out.append(tuple(int(v) for v in col if v))
    return out
