"""Compare the compiled and pure-Python convolution kernels.

    python benchmarks/bench_trigconv.py --repeat 3

Workloads are the products the solver actually forms: the cube of the
20-mode closed-form phi0, the phi1 * phi0^2 product of the second-order
forcing, and one Galerkin residual evaluation at N = 8.
"""
import argparse
import json
import time

from mpmath import mp, mpf

from phi4wave import coeff_algebra, kernels
from phi4wave.coeff_algebra import DiagonalSeq, diagonal_field, multiply, product_sine_sine, resonance_residuals
from phi4wave.elliptic import default_closed_form
from phi4wave.perturbation import build_phi0, build_phi1


def _workloads():
    params = default_closed_form().params
    phi0 = build_phi0(1, 20, params)
    phi1 = build_phi1(phi0, params.omega1_coeff, 60)
    p0 = diagonal_field(phi0)
    sq = product_sine_sine(p0, p0)
    c8 = DiagonalSeq([mpf(1)] + [mpf(10) ** (-2 * i) for i in range(1, 8)])
    return {
        "cube phi0 (20 modes)": lambda: multiply(product_sine_sine(p0, p0), p0),
        "phi1 * phi0^2 (60x60 by 78x78)": lambda: multiply(phi1, sq, nx=60, nt=60),
        "Galerkin residuals N=8": lambda: resonance_residuals(c8, mpf("0.28")),
    }


def _same(x, y):
    if hasattr(x, "coeffs"):
        x, y = x.coeffs, y.coeffs
    return all(a == b for a, b in zip(getattr(x, "flat", x), getattr(y, "flat", y)))


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--digits", type=int, default=40)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)
    mp.dps = args.digits

    if kernels.BACKEND != "cython":
        print("compiled kernel not available; only the Python kernel can be timed")
    results = []
    for name, fn in _workloads().items():
        row = {"workload": name}
        if kernels.BACKEND == "cython":
            coeff_algebra.trig_product = kernels.trig_product
            row["compiled_s"], ref = _time(fn, args.repeat)
        coeff_algebra.trig_product = kernels.python_trig_product
        row["python_s"], out = _time(fn, args.repeat)
        if kernels.BACKEND == "cython" and not _same(ref, out):
            raise SystemExit(f"{name}: kernels disagree")
        coeff_algebra.trig_product = kernels.trig_product
        results.append(row)

    print(f"{'workload':<34}{'compiled [s]':>14}{'python [s]':>12}{'speedup':>9}")
    for r in results:
        c = r.get("compiled_s")
        cs = f"{c:14.4f}" if c is not None else f"{'-':>14}"
        sp = f"{r['python_s'] / c:9.1f}" if c else f"{'-':>9}"
        print(f"{r['workload']:<34}{cs}{r['python_s']:12.4f}{sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"digits": args.digits, "results": results}, fh, indent=2)


if __name__ == "__main__":
    main()
