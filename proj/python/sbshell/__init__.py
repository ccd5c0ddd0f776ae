"""Kirchhoff-Love shells on scaled-boundary isogeometric multi-patch domains."""

from ._sbshell import (
    GeometryError,
    InputError,
    RunResult,
    SolverError,
    case_info,
    list_cases,
    loglog_slope,
    parse_mesh_size,
    partition,
    run,
)

__all__ = [
    "GeometryError",
    "InputError",
    "RunResult",
    "SolverError",
    "case_info",
    "list_cases",
    "loglog_slope",
    "parse_mesh_size",
    "partition",
    "run",
    "sweep",
]


def sweep(target, h, p=None, r=1, solver="direct"):
    """Run every mesh size in ``h``; returns the results and, when the case
    has a closed-form solution, the fitted L2 and H2 rates."""
    if len(h) < 2:
        raise InputError("a sweep needs at least two mesh levels")
    results = [run(target, p=p, h=str(x), r=r, solver=solver) for x in h]
    rates = None
    if results[0].l2 is not None:
        hs = [res.h for res in results]
        rates = {
            "l2": loglog_slope(hs, [res.l2 for res in results]),
            "h2": loglog_slope(hs, [res.h2 for res in results]),
        }
    return results, rates
