import io
import json
import math

import pytest

from phaseshift import cli, green
from phaseshift.potential import SquareWell
from phaseshift.config import ConfigError, build_config, config_hash, load_config, parse_lines


def run(argv):
    buf = io.StringIO()
    code = cli.main(argv, stdout=buf)
    return code, buf.getvalue()


def table(text):
    lines = text.splitlines()
    cols = next(l for l in lines if l.startswith("# columns: "))[len("# columns: "):].split(",")
    rows = [[float(v) for v in l.split(",")] for l in lines if not l.startswith("#")]
    return cols, rows


def test_compare_exact_vs_numerov():
    code, out = run(["compare", "--set", "potential.eta=0.05", "--set", "sweep.count=7"])
    assert code == 0
    cols, rows = table(out)
    assert cols[:6] == ["kappa", "eta", "p", "lambda", "delta_exact", "delta_numerov"]
    assert len(rows) == 7
    j = cols.index("max_abs_diff")
    assert max(r[j] for r in rows) < 1e-8
    assert [r[0] for r in rows] == pytest.approx([1.0, 2.5, 4.0, 5.5, 7.0, 8.5, 10.0])


def test_zero_coupling_gives_zero_everywhere():
    code, out = run(["compare", "--set", "methods=unitary2,green2,numerov,exact",
                     "--set", "sweep.count=3"])
    assert code == 0
    cols, rows = table(out)
    for r in rows:
        assert all(r[cols.index(c)] == 0.0 for c in cols if c.startswith("delta_"))


def test_first_order_special_point():
    code, out = run(["compare", "--set", "methods=unitary1,green1",
                     "--set", f"sweep.start={math.pi / 2}", "--set", "sweep.count=1",
                     "--set", "potential.eta=0.05"])
    cols, rows = table(out)
    assert rows[0][cols.index("delta_unitary1")] == pytest.approx(-0.05, abs=1e-12)
    assert rows[0][cols.index("ref_first_order")] == pytest.approx(-0.05, abs=1e-15)


def test_output_is_deterministic_and_hashed(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\npotential = well\npotential.eta = -0.02\n"
                   "methods = unitary2, exact\nsweep.count = 4\n")
    _, a = run(["compare", "--config", str(cfg)])
    _, b = run(["compare", "--config", str(cfg)])
    assert a == b
    parsed = load_config(str(cfg))
    header = [l for l in a.splitlines() if l.startswith("# config_sha256: ")][0]
    assert header.split()[-1] == config_hash(parsed.raw)
    raw = {l[len("# config: "):].split("=", 1)[0]: l.split("=", 1)[1]
           for l in a.splitlines() if l.startswith("# config: ")}
    assert config_hash(raw) == parsed.sha256


def test_json_and_degrees():
    base = ["compare", "--set", "potential.eta=0.05", "--set", "sweep.count=2"]
    _, out = run(base + ["--format", "json"])
    doc = json.loads(out)
    assert doc["columns"][0] == "kappa" and len(doc["rows"]) == 2
    _, deg = run(base + ["--format", "json", "--degrees"])
    ddoc = json.loads(deg)
    j = doc["columns"].index("delta_exact")
    assert ddoc["rows"][0][j] == pytest.approx(math.degrees(doc["rows"][0][j]))
    assert ddoc["rows"][0][0] == doc["rows"][0][0]
    assert set(doc["diagnostics"][0]) == {"exact", "numerov"}
    assert doc["diagnostics"][1]["numerov"]["fit_relative_residual"] < 1e-3


def test_row_failure_recorded():
    code, out = run(["compare", "--set", "potential.kind=gaussian", "--set", "potential.eta=0.1",
                     "--set", "methods=unitary1,exact", "--set", "sweep.count=2"])
    assert code == 0
    cols, rows = table(out)
    assert all(math.isnan(r[cols.index("delta_exact")]) for r in rows)
    assert all(math.isfinite(r[cols.index("delta_unitary1")]) for r in rows)
    assert out.count("# failure: row") == 2


def test_output_file(tmp_path):
    path = tmp_path / "out.csv"
    code, out = run(["compare", "--set", "sweep.count=2", "--output", str(path)])
    assert code == 0 and out == ""
    assert path.read_text().startswith("# phaseshift ")


def test_config_file_errors_name_the_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("potential = well\n\nsweep.count = many\n")
    code, _ = run(["compare", "--config", str(cfg)])
    assert code == 2
    assert f"{cfg}:3:" in capsys.readouterr().err
    cfg.write_text("potential.eta = 0.1\npotential.lambda = 0.2\n")
    assert run(["compare", "--config", str(cfg)])[0] == 2
    err = capsys.readouterr().err
    assert f"{cfg}:1:" in err and f"{cfg}:2" in err


@pytest.mark.parametrize("item,fragment", [
    ("nonsense", "expected 'key = value'"),
    ("potential.colour=red", "unknown key"),
    ("methods=exact,magic", "unknown method"),
    ("sweep.axis=time", "sweep.axis"),
    ("potential.kind=coulomb", "unknown potential"),
    ("numerov.hp=1.0", "below pi/8"),
    ("sweep.start=-1", "positive"),
])
def test_override_errors(item, fragment):
    with pytest.raises(ConfigError, match="--set\\[1\\]") as err:
        load_config(None, [item])
    assert fragment in str(err.value)


def test_coupling_conflicts_with_coupling_sweep():
    with pytest.raises(ConfigError, match="conflicts"):
        load_config(None, ["sweep.axis=lambda", "potential.eta=0.1"])


def test_parse_lines_comments_and_overrides():
    entries = parse_lines(["# only a comment",
                           "sweep.count = 3  # trailing", "sweep.count=5"], "f")
    cfg = build_config(entries)
    assert cfg.count == 5 and entries[0][2] == "f:2"


def test_eta_and_lambda_sweeps():
    cfg = load_config(None, ["sweep.axis=eta", "sweep.start=-0.1", "sweep.stop=0.1",
                             "sweep.count=3", "sweep.p=4"])
    pts = list(cfg.points())
    assert [p for p, _ in pts] == [4.0] * 3
    assert [lam for _, lam in pts] == pytest.approx([-0.4, 0.0, 0.4])
    cfg = load_config(None, ["sweep.axis=p", "potential.lambda=0.3", "sweep.count=2"])
    assert [lam for _, lam in cfg.points()] == [0.3, 0.3]


def test_wavefunction_dump():
    code, out = run(["wavefunction", "--set", "sweep.count=1", "--set", "sweep.start=6",
                     "--set", "potential.eta=0.05",
                     "--set", "methods=unitary1,green1,green2,numerov"])
    assert code == 0
    cols, rows = table(out)
    assert cols == ["r", "y_free", "y_unitary1", "y_green1", "y_green2", "y_numerov"]
    assert rows[0] == [0.0] * 6
    outside = [r for r in rows if r[0] > 2.0]
    # unitary1 differs from green1 only by its truncated momentum tail
    assert max(abs(r[2] - r[3]) for r in outside) < 1e-6
    # green iterates keep A = 1, Numerov has unit amplitude: O(eta^2) apart
    assert max(abs(r[2] - r[5]) for r in outside) < 0.05**2
    it = green.free_iterate(SquareWell(1.0, 0.3), 0, 6.0, 1.0)
    for _ in range(2):
        it = green.iterate(SquareWell(1.0, 0.3), 0, 6.0, 1.0, it)
    scale = math.hypot(it.A_n, it.B_n)
    assert max(abs(r[4] / scale - r[5]) for r in outside) < 1e-4


def test_wavefunction_free_limit():
    _, out = run(["wavefunction", "--set", "sweep.count=1", "--set", "sweep.start=3",
                  "--set", "methods=unitary1,green2"])
    cols, rows = table(out)
    for r in rows:
        assert r[2] == r[1] and r[3] == pytest.approx(r[1], abs=1e-15)


def test_wavefunction_requires_single_point(capsys):
    assert run(["wavefunction", "--set", "sweep.count=3"])[0] == 2
    assert "single parameter point" in capsys.readouterr().err
    assert run(["wavefunction", "--set", "sweep.count=1", "--set", "methods=exact"])[0] == 2


def test_validate_passes_by_default():
    code, out = run(["validate"])
    assert code == 0
    statuses = [l.rsplit(",", 1)[1] for l in out.splitlines() if not l.startswith("#")]
    assert statuses and set(statuses) == {"PASS"}


def test_validate_detects_injected_fault():
    code, out = run(["validate", "--set", "validate.inject=kernel_asymmetry"])
    assert code == 1
    line = next(l for l in out.splitlines() if l.startswith("kernel_symmetry,"))
    assert line.endswith(",FAIL")


def test_validate_tightened_tolerances_fail():
    code, out = run(["validate", "--set", "validate.tolerance_scale=0.1"])
    assert code == 1
    assert ",FAIL" in out


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert "phaseshift 0.1.0" in capsys.readouterr().out
