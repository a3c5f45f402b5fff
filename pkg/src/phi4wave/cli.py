"""Command-line front end.

    phi4wave galerkin      --n 8 --delta 1e-11
    phi4wave solve-nome    --precision 60
    phi4wave build         --amplitude 1 --epsilon 0.01
    phi4wave verify        [solution.json]
    phi4wave export-table  [report-or-solution.json]

Settings come from defaults, then a JSON file given by ``--config``, then the
command-line flags (flags win).  ``PHI4WAVE_OUT`` overrides the output
directory from the config file; an explicit ``--out`` beats both.  Data goes to
stdout, diagnostics to stderr.

Exit codes: 0 ok, 1 nonconvergence, 2 config or parse error, 3 nome bracket
failure, 4 resonance, 5 a verification check failed.
"""
import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from mpmath import mp, mpf

from phi4wave import __version__, serialize
from phi4wave.bigreal import DEFAULT_DIGITS, set_precision, to_decimal
from phi4wave.coeff_algebra import DiagonalSeq, resonance_residuals
from phi4wave.elliptic import (
    BracketError,
    DomainError,
    closed_form_params,
    default_closed_form,
    f_sequence,
    lemma_residuals,
    verify_cn_ode,
    verify_proportionality,
)
from phi4wave.galerkin import ROOT_PICKS, NoQualifyingRoot, NonConvergence, eliminate_comega, galerkin_solve
from phi4wave.perturbation import (
    ResonanceError,
    build_solution,
    first_order_forcing,
    pde_residual_scan,
    scaling_ratios,
    second_order_forcing,
)

log = logging.getLogger("phi4wave")

OUT_ENV = "PHI4WAVE_OUT"

EXIT_OK = 0
EXIT_NONCONVERGENCE = 1
EXIT_CONFIG = 2
EXIT_BRACKET = 3
EXIT_RESONANCE = 4
EXIT_CHECK_FAILED = 5

VERIFY_EPSILONS = ("1e-2", "5e-3", "2.5e-3", "1.25e-3", "6.25e-4")
RATIO_BAND = (6.0, 10.0)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    precision: int = DEFAULT_DIGITS
    n: int = 8
    delta: str = "1e-11"
    amplitude: str = "1"
    epsilon: str = "0.01"
    output_dir: str = "."
    root_pick: str = "smallest-abs"

    def validate(self):
        if not isinstance(self.precision, int) or self.precision < 20:
            raise ConfigError(f"precision must be an integer >= 20, got {self.precision!r}")
        if not isinstance(self.n, int) or not 2 <= self.n <= 50:
            raise ConfigError(f"N must be an integer with 2 <= N <= 50, got {self.n!r}")
        if self.root_pick not in ROOT_PICKS:
            raise ConfigError(f"root_pick must be one of {', '.join(ROOT_PICKS)}")
        with mp.workdps(self.precision):
            delta = self._number("delta")
            if not delta > mpf(10) ** (5 - self.precision):
                raise ConfigError(f"delta must exceed 1e{5 - self.precision} at {self.precision} digits")
            self._number("amplitude")
            if self._number("epsilon") < 0:
                raise ConfigError("epsilon must be non-negative")
        return self

    def _number(self, name):
        raw = getattr(self, name)
        try:
            v = mpf(str(raw))
        except (ValueError, TypeError):
            raise ConfigError(f"{name} is not a number: {raw!r}") from None
        if not mp.isfinite(v):
            raise ConfigError(f"{name} must be finite, got {raw!r}")
        return v

    @property
    def out_path(self):
        return Path(self.output_dir)


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}
_FLAG_TO_KEY = {"precision": "precision", "n": "n", "delta": "delta", "amplitude": "amplitude",
                "epsilon": "epsilon", "out": "output_dir", "root_pick": "root_pick"}


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def resolve_config(args, environ=None):
    """Merge defaults, config file, ``PHI4WAVE_OUT`` and flags, in that order."""
    environ = os.environ if environ is None else environ
    values = asdict(RunConfig())
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    if environ.get(OUT_ENV):
        values["output_dir"] = environ[OUT_ENV]
    explicit = set()
    for flag, key in _FLAG_TO_KEY.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
            explicit.add(key)
    for key in ("precision", "n"):
        if isinstance(values[key], str):
            try:
                values[key] = int(values[key])
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {values[key]!r}") from None
    cfg = RunConfig(**values).validate()
    cfg.explicit = explicit
    return cfg


def _sci(x, digits=12):
    if x == 0:
        return "0"
    return mp.nstr(x, digits, min_fixed=1, max_fixed=0)


def _write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize.dumps(obj))
    log.info("wrote %s", path)


# -- galerkin / tables -------------------------------------------------------

def comparison_rows(report, q):
    """Rows ``(j, c_j, R_jj(c), d_j, R_jj(d))`` over the ``3N`` reported harmonics.

    ``d`` is the elliptic sequence ``f_j / f_1`` cut after ``3N - 1`` modes;
    its ``c_omega`` is eliminated through the first equation.
    """
    n_eq = len(report.residuals)
    f = f_sequence(q, n_eq - 1)
    d = [v / f.coeffs[0] for v in f] + [mpf(0)]
    d_seq = DiagonalSeq(d)
    cw_d = eliminate_comega(d_seq)
    r_d = list(resonance_residuals(d_seq, cw_d))[:n_eq]
    rows = []
    for i in range(n_eq):
        rows.append((2 * i + 1, report.c.at(2 * i + 1), report.residuals.coeffs[i], d[i], r_d[i]))
    return rows, cw_d


def render_table(rows):
    head = f"{'j':>4}  {'c_j':<20}{'R_jj(c)':<12}{'d_j':<20}{'R_jj(d)':<12}"
    lines = [head, "-" * len(head)]
    for j, c, rc, d, rd in rows:
        lines.append(f"{j:>4}  {_sci(c):<20}{_sci(rc, 2):<12}{_sci(d):<20}{_sci(rd, 2):<12}")
    return "\n".join(lines)


def write_table_csv(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "c_j", "R_jj(c)", "d_j", "R_jj(d)"])
        for j, c, rc, d, rd in rows:
            w.writerow([j, to_decimal(c), to_decimal(rc), to_decimal(d), to_decimal(rd)])
    log.info("wrote %s", path)


def _emit_table(cfg, report, stem):
    q = default_closed_form().params.q
    rows, cw_d = comparison_rows(report, q)
    text = render_table(rows)
    out = cfg.out_path
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.txt").write_text(text + "\n")
    write_table_csv(out / f"{stem}.csv", rows)
    return text, cw_d


def cmd_galerkin(cfg, args):
    report = galerkin_solve(cfg.n, mpf(cfg.delta), cfg.root_pick)
    stem = f"galerkin_N{cfg.n}"
    _write_json(cfg.out_path / f"{stem}.json", serialize.report_to_json(report))
    text, _ = _emit_table(cfg, report, f"{stem}_table")
    print(text)
    print(f"C_omega = {to_decimal(report.c_omega)}")
    print(f"sweeps = {report.iterations}  converged = {report.converged}  "
          f"sufficient(3N residuals < delta) = {report.sufficient}")
    if not report.converged:
        print(f"error: solved residuals not below delta = {cfg.delta}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_export_table(cfg, args):
    src = args.input
    if src is None:
        report = galerkin_solve(cfg.n, mpf(cfg.delta), cfg.root_pick)
        print(_emit_table(cfg, report, f"galerkin_N{cfg.n}_table")[0])
        return EXIT_OK
    try:
        obj = json.loads(Path(src).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {src}: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{src}: expected a JSON object")
    out = cfg.out_path
    out.mkdir(parents=True, exist_ok=True)
    try:
        if "residuals" in obj and "c" in obj:
            if obj.get("digits") and "precision" not in cfg.explicit:
                set_precision(int(obj["digits"]))
            report = serialize.report_from_json(obj)
            print(_emit_table(cfg, report, f"galerkin_N{report.N}_table")[0])
            return EXIT_OK
        sol = serialize.load_solution(src) if "precision" not in cfg.explicit else serialize.solution_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{src}: {exc}") from None
    with open(out / "phi0.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "value"])
        for j, v in zip(sol.phi0_diag.harmonics, sol.phi0_diag):
            w.writerow([j, to_decimal(v)])
    serialize.write_grid_csv(sol.phi1, out / "phi1.csv")
    serialize.write_grid_csv(sol.phi2, out / "phi2.csv")
    serialize.write_field_csv(sol, out / "field.csv", points=args.points)
    print(f"wrote phi0.csv phi1.csv phi2.csv field.csv to {out}")
    return EXIT_OK


# -- elliptic parameters -----------------------------------------------------

def nome_summary(cf):
    p = cf.params
    f1 = f_sequence(p.q, 1).coeffs[0]
    w1 = p.omega1_coeff
    return {
        "params": serialize.params_to_json(p),
        "omega1_coeff": to_decimal(w1),
        "omega2_coeff": to_decimal(-w1 ** 2 / 2),
        "c_omega": to_decimal(1 / (256 * f1 ** 2)),
        "alpha_gamma": to_decimal(p.alpha * p.gamma),
        "sum_f2": to_decimal(cf.sum_f2),
        "sum_f2_target": to_decimal(cf.sum_f2_target),
        "sum_f2_defect": to_decimal(cf.sum_f2_defect),
        "digits": mp.dps,
    }


def cmd_solve_nome(cfg, args):
    cf = closed_form_params()
    p = cf.params
    d = cfg.precision
    for name, v in (("q", p.q), ("k", p.k), ("gamma", p.gamma), ("alpha", p.alpha),
                    ("omega1_coeff", p.omega1_coeff), ("omega2_coeff", -p.omega1_coeff ** 2 / 2)):
        print(f"{name:<13}= {mp.nstr(v, d)}")
    print(f"{'sum_f2_check':<13}= {mp.nstr(cf.sum_f2_defect, 3)}")
    _write_json(cfg.out_path / "nome.json", nome_summary(cf))
    return EXIT_OK


# -- solution ----------------------------------------------------------------

def cmd_build(cfg, args):
    cf = default_closed_form()
    sol = build_solution(mpf(cfg.amplitude), mpf(cfg.epsilon), params=cf.params)
    _write_json(cfg.out_path / "solution.json", serialize.solution_to_json(sol))
    print(f"omega1 = {to_decimal(sol.omega1)}")
    print(f"omega2 = {to_decimal(sol.omega2)}")
    print(f"omega  = {to_decimal(sol.omega)}")
    return EXIT_OK


def _order_defects(sol):
    """Coefficient-space residuals of the first- and second-order equations."""
    phi0 = sol.phi0_diag
    f1 = first_order_forcing(phi0, sol.omega1)
    h = sol.phi1.nx
    lhs1 = sol.phi1.wave_operator()
    r1 = max(abs(lhs1[n, j] - f1[n, j]) for n in range(1, h + 1) for j in range(1, h + 1))
    scale1 = f1.max_abs() or mpf(1)
    f2 = second_order_forcing(phi0, sol.phi1, sol.omega1, sol.omega2, sol.phi2.nx)
    lhs2 = sol.phi2.wave_operator()
    h2 = sol.phi2.nx
    r2 = max(abs(lhs2[n, j] - f2[n, j]) for n in range(1, h2 + 1) for j in range(1, h2 + 1))
    scale2 = f2.max_abs() or mpf(1)
    return r1 / scale1, r2 / scale2


def run_checks(sol, epsilons=VERIFY_EPSILONS):
    """Named verification checks; each entry is ``(name, passed, details)``."""
    checks = []
    scan = pde_residual_scan(sol, epsilons)
    peak = max(r for _, r in scan)
    detail = {
        "epsilon": [mp.nstr(e, 6) for e, _ in scan],
        "residual": [repr(r) for _, r in scan],
        "residual_over_eps3": [repr(r / float(e) ** 3) if e else "nan" for e, r in scan],
    }
    if peak < 1e-14:
        ok = True
        detail["note"] = "field vanishes"
    else:
        ratios = scaling_ratios(scan)
        detail["ratios"] = [repr(x) for x in ratios]
        ok = all(RATIO_BAND[0] <= x <= RATIO_BAND[1] for x in ratios)
    checks.append(("pde_residual_scaling", ok, detail))

    tol = mpf(10) ** (15 - mp.dps)
    r1, r2 = _order_defects(sol)
    checks.append(("order1_equation", r1 < tol, {"relative_defect": mp.nstr(r1, 3), "tol": mp.nstr(tol, 1)}))
    checks.append(("order2_equation", r2 < tol, {"relative_defect": mp.nstr(r2, 3), "tol": mp.nstr(tol, 1)}))

    p = sol.params
    try:
        defects = p.check()
        checks.append(("elliptic_invariants", True, {k: mp.nstr(v, 3) for k, v in defects.items()}))
    except ValueError as exc:
        checks.append(("elliptic_invariants", False, {"error": str(exc)}))

    prop = verify_proportionality(p, 30, 25)
    checks.append(("cube_proportionality", prop < mpf("1e-15"), {"max_relative_defect": mp.nstr(prop, 3)}))
    ode = verify_cn_ode(p, 64)
    checks.append(("cn_ode", ode < mpf("1e-20"), {"max_defect": mp.nstr(ode, 3)}))
    lem = max(abs(r) for r in lemma_residuals(p.q, 30))
    checks.append(("lemma_residuals", lem < mpf("1e-25"), {"max_residual": mp.nstr(lem, 3)}))
    return checks


def cmd_verify(cfg, args):
    path = Path(args.solution) if args.solution else cfg.out_path / "solution.json"
    try:
        if "precision" in cfg.explicit:
            with mp.workdps(cfg.precision):
                obj = json.loads(path.read_text())
            sol = serialize.solution_from_json(obj)
        else:
            sol = serialize.load_solution(path)
    except OSError as exc:
        raise ConfigError(f"cannot read solution {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, serialize.FormatError, DomainError) as exc:
        raise ConfigError(f"cannot parse solution {path}: {exc}") from None

    checks = run_checks(sol)
    failed = [name for name, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        for key, v in detail.items():
            print(f"      {key}: {v}")
    _write_json(cfg.out_path / "verify.json",
                {"checks": [{"name": n, "passed": ok, "details": d} for n, ok, d in checks],
                 "failed": failed, "solution": str(path)})
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--precision", type=int, help="working precision in decimal digits (>= 20)")
    common.add_argument("--n", type=int, help="Galerkin truncation N (2..50)")
    common.add_argument("--delta", help="residual threshold (decimal string)")
    common.add_argument("--amplitude", help="amplitude A")
    common.add_argument("--epsilon", help="expansion parameter")
    common.add_argument("--out", help=f"output directory (overrides ${OUT_ENV})")
    common.add_argument("--root-pick", dest="root_pick", choices=ROOT_PICKS)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="phi4wave", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("galerkin", parents=[common], help="solve the truncated resonance system")
    sub.add_parser("solve-nome", parents=[common], help="solve for the nome and elliptic parameters")
    sub.add_parser("build", parents=[common], help="build and save the asymptotic solution")
    v = sub.add_parser("verify", parents=[common], help="check a saved solution")
    v.add_argument("solution", nargs="?", help="solution file (default: <out>/solution.json)")
    e = sub.add_parser("export-table", parents=[common], help="write CSV/text tables")
    e.add_argument("input", nargs="?", help="Galerkin report or solution JSON; omitted runs Galerkin")
    e.add_argument("--points", type=int, default=65, help="field samples per axis for solution exports")
    return p


COMMANDS = {
    "galerkin": cmd_galerkin,
    "solve-nome": cmd_solve_nome,
    "build": cmd_build,
    "verify": cmd_verify,
    "export-table": cmd_export_table,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    old_dps = mp.dps
    try:
        cfg = resolve_config(args)
        set_precision(cfg.precision)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergence, NoQualifyingRoot) as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except BracketError as exc:
        print(f"bracket failure: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except ResonanceError as exc:
        print(f"resonance: {exc}", file=sys.stderr)
        return EXIT_RESONANCE
    finally:
        mp.dps = old_dps


if __name__ == "__main__":
    sys.exit(main())
