"""JSON and CSV formats.

Every big-real value is written as a decimal string that parses back to the
identical binary value at the precision it was written with.  JSON output is
key-sorted and carries no timestamps, so identical inputs give identical bytes.
"""
import csv
import json

import numpy as np
from mpmath import mp, mpf

from phi4wave.bigreal import from_decimal, to_decimal
from phi4wave.coeff_algebra import CoeffGrid, DiagonalSeq
from phi4wave.elliptic import EllipticParams
from phi4wave.galerkin import SolveReport
from phi4wave.perturbation import AsymptoticSolution

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def seq_to_json(seq):
    return {"harmonics": seq.harmonics, "coeffs": [to_decimal(c) for c in seq]}


def seq_from_json(obj):
    return DiagonalSeq([from_decimal(s) for s in obj["coeffs"]])


def grid_to_json(grid):
    return {
        "basis": list(grid.basis),
        "nx": grid.nx,
        "nt": grid.nt,
        "coeffs": [to_decimal(v) for v in grid.coeffs.flat],
    }


def grid_from_json(obj):
    nx, nt = int(obj["nx"]), int(obj["nt"])
    vals = [from_decimal(s) for s in obj["coeffs"]]
    if len(vals) != (nx + 1) * (nt + 1):
        raise FormatError(f"grid has {len(vals)} values, expected {(nx + 1) * (nt + 1)}")
    arr = np.array(vals, dtype=object).reshape(nx + 1, nt + 1)
    return CoeffGrid(arr, tuple(obj.get("basis", ("sin", "sin"))))


def write_grid_csv(grid, path):
    """Nonzero coefficients as ``n,j,value`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "j", "value"])
        for n, j, v in grid.nonzero():
            w.writerow([n, j, to_decimal(v)])


def params_to_json(p):
    return {name: to_decimal(getattr(p, name)) for name in ("k", "kprime", "K", "Kprime", "q", "gamma", "alpha")}


def params_from_json(obj):
    return EllipticParams(**{name: from_decimal(v) for name, v in obj.items()})


def report_to_json(rep):
    return {
        "N": rep.N,
        "delta": to_decimal(rep.delta),
        "c": seq_to_json(rep.c),
        "c_omega": to_decimal(rep.c_omega),
        "residuals": seq_to_json(rep.residuals),
        "iterations": rep.iterations,
        "converged": rep.converged,
        "sufficient": rep.sufficient,
        "root_pick": rep.root_pick,
        "trace": [{"k": t["k"], "sweeps": t["sweeps"], "c": to_decimal(t["c"])} for t in rep.trace],
        "digits": mp.dps,
    }


def report_from_json(obj):
    trace = [{"k": t["k"], "sweeps": t["sweeps"], "c": from_decimal(t["c"])} for t in obj.get("trace", [])]
    return SolveReport(
        N=int(obj["N"]), delta=from_decimal(obj["delta"]), c=seq_from_json(obj["c"]),
        c_omega=from_decimal(obj["c_omega"]), residuals=seq_from_json(obj["residuals"]),
        iterations=int(obj["iterations"]), converged=bool(obj["converged"]),
        root_pick=obj.get("root_pick", "smallest-abs"), trace=trace,
    )


def solution_to_json(sol):
    return {
        "format": FORMAT_VERSION,
        "A": to_decimal(sol.A),
        "epsilon": to_decimal(sol.epsilon),
        "omega1": to_decimal(sol.omega1),
        "omega2": to_decimal(sol.omega2),
        "omega": to_decimal(sol.omega),
        "params": params_to_json(sol.params),
        "phi0": seq_to_json(sol.phi0_diag),
        "phi1": grid_to_json(sol.phi1),
        "phi2": grid_to_json(sol.phi2),
        "meta": dict(sol.meta, q=to_decimal(sol.params.q)),
    }


def solution_from_json(obj):
    try:
        if obj.get("format") != FORMAT_VERSION:
            raise FormatError(f"unsupported solution format {obj.get('format')!r}")
        return AsymptoticSolution(
            A=from_decimal(obj["A"]),
            params=params_from_json(obj["params"]),
            phi0_diag=seq_from_json(obj["phi0"]),
            phi1=grid_from_json(obj["phi1"]),
            phi2=grid_from_json(obj["phi2"]),
            omega1=from_decimal(obj["omega1"]),
            omega2=from_decimal(obj["omega2"]),
            epsilon=from_decimal(obj["epsilon"]),
            meta=dict(obj.get("meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed solution file: {exc}") from exc


def load_solution(path):
    """Read a solution file, switching to the precision it was written at."""
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise FormatError(f"{path}: expected a JSON object")
    digits = obj.get("meta", {}).get("digits")
    if digits:
        mp.dps = int(digits)
    return solution_from_json(obj)


def write_field_csv(sol, path, points=65):
    """Sample the field on a uniform ``(x, t)`` grid over one period, as floats."""
    from phi4wave.perturbation import evaluate_field

    period = 2 * mp.pi / sol.omega
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "t", "phi"])
        for i in range(points):
            x = 2 * mp.pi * i / (points - 1)
            for k in range(points):
                t = period * k / (points - 1)
                w.writerow([mp.nstr(x, 17), mp.nstr(t, 17), mp.nstr(evaluate_field(sol, x, t), 17)])
