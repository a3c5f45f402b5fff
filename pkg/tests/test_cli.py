import csv
import json
import subprocess
import sys

import pytest
from mpmath import mp, mpf

from paper_values import C_OMEGA, NOME, TABLE_C
from phi4wave import cli
from phi4wave.elliptic import BracketError
from phi4wave.galerkin import NonConvergence
from phi4wave.perturbation import ResonanceError


@pytest.fixture
def run(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv(cli.OUT_ENV, raising=False)

    def _run(*argv, out=True):
        args = list(argv) + (["--out", str(tmp_path)] if out else [])
        code = cli.main(args)
        cap = capsys.readouterr()
        return code, cap.out, cap.err

    _run.dir = tmp_path
    return _run


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    d = tmp_path_factory.mktemp("built")
    assert cli.main(["build", "--out", str(d)]) == 0
    return d


def test_galerkin_n8(run):
    code, out, _ = run("galerkin", "--n", "8")
    assert code == 0
    report = json.loads((run.dir / "galerkin_N8.json").read_text())
    assert abs(mpf(report["c_omega"]) - mpf(C_OMEGA)) < mpf("1e-10")
    rows = list(csv.DictReader(open(run.dir / "galerkin_N8_table.csv")))
    assert len(rows) == 24 and rows[-1]["j"] == "47"
    for row in rows[:8]:
        assert abs(mpf(row["c_j"]) - mpf(TABLE_C[int(row["j"])])) < mpf("1e-10")
    assert "R_jj(d)" in out and "1.44162661711e-2" in out


def test_galerkin_config_errors(run):
    assert run("galerkin", "--n", "1")[0] == cli.EXIT_CONFIG
    assert run("galerkin", "--n", "51")[0] == cli.EXIT_CONFIG
    assert run("galerkin", "--delta", "1e-40")[0] == cli.EXIT_CONFIG
    assert run("galerkin", "--delta", "abc")[0] == cli.EXIT_CONFIG
    assert run("build", "--epsilon", "-1")[0] == cli.EXIT_CONFIG


def test_galerkin_tight_delta(run):
    code, out, _ = run("galerkin", "--n", "12", "--delta", "1e-13")
    assert code == 0
    report = json.loads((run.dir / "galerkin_N12.json").read_text())
    assert report["converged"] and report["N"] == 12


def test_argparse_errors_exit_2(run):
    with pytest.raises(SystemExit) as info:
        cli.main(["galerkin", "--n", "x"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["galerkin", "--root-pick", "largest"])
    assert info.value.code == 2


def test_solve_nome(run):
    code, out, _ = run("solve-nome")
    assert code == 0
    q = mpf(out.split("\n")[0].split("=")[1])
    assert abs(q - mpf(NOME)) < mpf("1e-13")
    side = json.loads((run.dir / "nome.json").read_text())
    assert side["digits"] == 40 and mpf(side["sum_f2_defect"]) < mpf("1e-25")


def test_solve_nome_precision_60_is_stable(run):
    outs = [run("solve-nome", "--precision", "60")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    q60 = outs[0].split("\n")[0].split("=")[1].strip()
    with mp.workdps(80):
        from phi4wave.elliptic import solve_nome

        q80 = mp.nstr(solve_nome(), 80)
    assert q60[:57] == q80[:57]   # "0.0" then 55 significant digits


def test_solve_nome_low_precision(run):
    assert run("solve-nome", "--precision", "10")[0] == cli.EXIT_CONFIG


def test_build_and_determinism(run, built):
    code, out, _ = run("build")
    assert code == 0
    assert (run.dir / "solution.json").read_bytes() == (built / "solution.json").read_bytes()
    omega = mpf(out.split("omega  =")[1].split()[0])
    assert abs(omega - (1 + mpf("1.0983600974e-2") - mpf("0.6031974518e-4"))) < mpf("1e-11")


def test_build_zero_amplitude(run):
    code, out, _ = run("build", "--amplitude", "0")
    assert code == 0 and "omega  = 1.0" in out
    obj = json.loads((run.dir / "solution.json").read_text())
    assert all(mpf(v) == 0 for v in obj["phi1"]["coeffs"] + obj["phi0"]["coeffs"])


def test_verify_fresh_build(run, built):
    code, out, err = run("verify", str(built / "solution.json"))
    assert code == 0, out + err
    assert "FAIL" not in out and "residual_over_eps3" in out
    report = json.loads((run.dir / "verify.json").read_text())
    names = [c["name"] for c in report["checks"]]
    for name in ("pde_residual_scaling", "order1_equation", "cube_proportionality", "cn_ode", "lemma_residuals"):
        assert name in names


@pytest.mark.parametrize("field,index", [("phi0", 0), ("phi1", 64)])
def test_verify_detects_corruption(run, built, field, index):
    obj = json.loads((built / "solution.json").read_text())
    obj[field]["coeffs"][index] = str(mpf(obj[field]["coeffs"][index]) + mpf("1e-6"))
    bad = run.dir / "bad.json"
    bad.write_text(json.dumps(obj))
    code, out, err = run("verify", str(bad))
    assert code == cli.EXIT_CHECK_FAILED
    assert "FAIL  pde_residual_scaling" in out and "pde_residual_scaling" in err


def test_verify_detects_second_order_corruption(run, built):
    obj = json.loads((built / "solution.json").read_text())
    nt = obj["phi2"]["nt"] + 1
    obj["phi2"]["coeffs"][nt + 3] = str(mpf(obj["phi2"]["coeffs"][nt + 3]) + mpf("1e-6"))
    bad = run.dir / "bad2.json"
    bad.write_text(json.dumps(obj))
    code, _, err = run("verify", str(bad))
    assert code == cli.EXIT_CHECK_FAILED and "order2_equation" in err


def test_verify_parse_errors(run):
    bad = run.dir / "broken.json"
    bad.write_text("{")
    assert run("verify", str(bad))[0] == cli.EXIT_CONFIG
    assert run("verify", str(run.dir / "missing.json"))[0] == cli.EXIT_CONFIG


def test_config_file_and_precedence(run, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "delta": "1e-9", "output_dir": str(tmp_path / "from_cfg")}))
    assert cli.main(["galerkin", "--config", str(cfg)]) == 0
    assert (tmp_path / "from_cfg" / "galerkin_N3.json").exists()
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "from_env"))
    assert cli.main(["galerkin", "--config", str(cfg), "--n", "2"]) == 0
    assert (tmp_path / "from_env" / "galerkin_N2.json").exists()
    assert mpf(json.loads((tmp_path / "from_env" / "galerkin_N2.json").read_text())["delta"]) == mpf("1e-9")
    assert cli.main(["galerkin", "--config", str(cfg), "--out", str(tmp_path / "from_flag")]) == 0
    assert (tmp_path / "from_flag" / "galerkin_N3.json").exists()


@pytest.mark.parametrize("content", ['{"bogus": 1}', "{", "[1]", '{"precision": "abc"}'])
def test_bad_config(run, tmp_path, content):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    assert run("galerkin", "--config", str(cfg))[0] == cli.EXIT_CONFIG


def test_export_table_from_report_and_solution(run, built):
    assert run("galerkin", "--n", "3")[0] == 0
    code, out, _ = run("export-table", str(run.dir / "galerkin_N3.json"))
    assert code == 0 and (run.dir / "galerkin_N3_table.csv").exists()
    code, out, _ = run("export-table", str(built / "solution.json"), "--points", "9")
    assert code == 0
    for name in ("phi0.csv", "phi1.csv", "phi2.csv", "field.csv"):
        assert (run.dir / name).exists()
    assert len(list(csv.reader(open(run.dir / "field.csv")))) == 82


def test_export_table_runs_galerkin(run):
    code, out, _ = run("export-table", "--n", "2")
    assert code == 0 and (run.dir / "galerkin_N2_table.txt").exists()


def test_error_exit_codes(run, monkeypatch):
    def boom(exc):
        def f(*a, **k):
            raise exc
        return f

    monkeypatch.setattr(cli, "galerkin_solve", boom(NonConvergence("stuck")))
    assert run("galerkin")[0] == cli.EXIT_NONCONVERGENCE
    monkeypatch.setattr(cli, "closed_form_params", boom(BracketError("none")))
    assert run("solve-nome")[0] == cli.EXIT_BRACKET
    monkeypatch.setattr(cli, "build_solution", boom(ResonanceError([(3, 3)], [mpf(1)])))
    code, _, err = run("build")
    assert code == cli.EXIT_RESONANCE and "(3, 3)" in err


def test_precision_restored(run):
    mp.dps = 40
    run("solve-nome", "--precision", "25")
    assert mp.dps == 40


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "phi4wave.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
