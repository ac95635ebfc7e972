import json

import pytest

from nlclaw.cli import main

SHOCK = """
name = shock
mode = nn
initial = riemann 1 0
epsilon = 0.1
T = 1
dx = 0.005
domain = -1.5 2.0
stride = 50
"""

PULSE = """
name = pulse
mode = euler
initial = expression 1 + 0.1*exp(-x^2)
velocity = 0.2*tanh(x)
epsilon = 0.1
T = 0.3
dx = 0.0125
domain = -6 6
stride = 20
"""

PLANE = """
name = plane
mode = nn2d
initial = expression -tanh(x)
epsilon = 0.1
T = 0.2
dx = 0.02
domain = -3 3
domain_y = 0 0.2
"""

RARE_SWEEP = """
name = rare
mode = nn
initial = riemann -1 1
epsilon_list = 0.2 0.1 0.05
T = 1
dx = 0.05
domain = -2 2
expect = nonconvergence
"""


def _write(tmp, name, text):
    p = tmp / name
    p.write_text(text)
    return p


@pytest.fixture(scope="module")
def shock_runs(tmp_path_factory):
    """The same shock scenario run twice into separate directories."""
    outs = []
    for tag in ("a", "b"):
        out = tmp_path_factory.mktemp(f"shock_{tag}")
        scn = _write(out, "shock.scn", SHOCK)
        rc = main(["run", str(scn), "--outdir", str(out)])
        outs.append((rc, out))
    return outs


def test_shock_run_succeeds_and_writes_files(shock_runs):
    rc, out = shock_runs[0]
    assert rc == 0
    assert (out / "shock.csv").exists()
    assert (out / "shock_report.json").exists()
    assert (out / "shock_profile.dat").exists()


def test_shock_report_contents(shock_runs):
    _, out = shock_runs[0]
    rep = json.loads((out / "shock_report.json").read_text())
    assert rep["scenario"] == "shock"
    assert rep["mode"] == "nn"
    assert rep["epsilon"] == 0.1
    assert rep["passed"] is True
    fs = rep["front_speed"]
    assert abs(fs["measured"] - 0.5) <= 0.01
    assert fs["predicted"] == 0.5
    names = [c["name"] for c in rep["checks"]["checks"]]
    assert "max principle" in names
    assert all(c["passed"] for c in rep["checks"]["checks"])


def test_snapshot_csv_format(shock_runs):
    _, out = shock_runs[0]
    lines = (out / "shock.csv").read_text().splitlines()
    assert lines[0].startswith("# nlclaw ")
    assert lines[1].startswith("# scenario=shock mode=nn")
    assert lines[2] == "t,x,u"
    first = lines[3].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) == -1.5


def test_profile_format(shock_runs):
    _, out = shock_runs[0]
    lines = (out / "shock_profile.dat").read_text().splitlines()
    assert lines[2] == "# x u"
    x0, u0 = lines[3].split()
    assert float(x0) == -1.5 and float(u0) == 1.0


def test_reruns_byte_identical(shock_runs):
    (_, a), (_, b) = shock_runs
    for name in ("shock.csv", "shock_report.json", "shock_profile.dat"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_no_absolute_paths_in_outputs(shock_runs):
    _, out = shock_runs[0]
    for name in ("shock.csv", "shock_report.json", "shock_profile.dat"):
        text = (out / name).read_text()
        assert str(out) not in text


def test_malformed_scenario_exits_1_writes_nothing(tmp_path):
    scn = _write(tmp_path, "bad.scn", "name = x\nmode = warp\n")
    out = tmp_path / "out"
    out.mkdir()
    rc = main(["run", str(scn), "--outdir", str(out)])
    assert rc == 1
    assert list(out.iterdir()) == []


def test_missing_file_exits_1(tmp_path):
    rc = main(["run", str(tmp_path / "nope.scn"), "--outdir", str(tmp_path)])
    assert rc == 1


def test_euler_run(tmp_path):
    scn = _write(tmp_path, "pulse.scn", PULSE)
    rc = main(["euler", str(scn), "--outdir", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "pulse_report.json").read_text())
    assert rep["mode"] == "euler"
    assert rep["passed"] is True
    assert rep["conservative_residual"]["mass"] >= 0.0
    assert rep["vacuum_flagged"] is False
    head = (tmp_path / "pulse.csv").read_text().splitlines()[2]
    assert head == "t,x,rho,v"


def test_euler_subcommand_rejects_other_modes(tmp_path):
    scn = _write(tmp_path, "shock.scn", SHOCK)
    rc = main(["euler", str(scn), "--outdir", str(tmp_path)])
    assert rc == 1


def test_2d_run(tmp_path):
    scn = _write(tmp_path, "plane.scn", PLANE)
    rc = main(["run", str(scn), "--outdir", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "plane_report.json").read_text())
    assert rep["passed"] is True
    head = (tmp_path / "plane.csv").read_text().splitlines()[2]
    assert head == "x,y,u"


def test_json_output_mode(tmp_path):
    scn = _write(tmp_path, "plane.scn", PLANE + "output = json\n")
    rc = main(["run", str(scn), "--outdir", str(tmp_path)])
    assert rc == 0
    body = json.loads((tmp_path / "plane.json").read_text())
    assert body["columns"] == ["x", "y", "u"]
    assert len(body["rows"]) > 0


def test_verify_writes_only_report(tmp_path):
    scn = _write(tmp_path, "pulse.scn", PULSE)
    out = tmp_path / "out"
    out.mkdir()
    rc = main(["verify", str(scn), "--outdir", str(out)])
    assert rc == 0
    assert [p.name for p in out.iterdir()] == ["pulse_report.json"]


def test_sweep_plateau(tmp_path):
    scn = _write(tmp_path, "rare.scn", RARE_SWEEP)
    rc = main(["sweep", str(scn), "--outdir", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "rare_report.json").read_text())
    errs = [row["error_L1"] for row in rep["table"]["rows"]]
    assert all(abs(e - 1.0) <= 0.1 for e in errs)
    lines = (tmp_path / "rare_table.dat").read_text().splitlines()
    assert lines[2] == "# epsilon dx dt error_L1 error_sup floor_dominated"
    assert len(lines) == 6
    # per-epsilon final-state snapshots accompany the table
    assert (tmp_path / "rare_eps0.2.csv").exists()
    assert (tmp_path / "rare_eps0.05.csv").exists()


def test_sweep_determinism_across_thread_counts(tmp_path, monkeypatch):
    scn = _write(tmp_path, "rare.scn", RARE_SWEEP)
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"t{threads}"
        out.mkdir()
        monkeypatch.setenv("NLCLAW_THREADS", threads)
        rc = main(["sweep", str(scn), "--outdir", str(out)])
        assert rc == 0
        outs.append(out)
    a, b = outs
    for p in sorted(a.iterdir()):
        assert (b / p.name).read_bytes() == p.read_bytes()


def test_bad_thread_env_is_input_error(tmp_path, monkeypatch):
    scn = _write(tmp_path, "rare.scn", RARE_SWEEP)
    monkeypatch.setenv("NLCLAW_THREADS", "zero")
    rc = main(["sweep", str(scn), "--outdir", str(tmp_path)])
    assert rc == 1


def test_sweep_requires_epsilon_list(tmp_path):
    scn = _write(tmp_path, "shock.scn", SHOCK)
    rc = main(["sweep", str(scn), "--outdir", str(tmp_path)])
    assert rc == 1


def test_expected_nonconvergence_absent_fails_run(tmp_path):
    # a smooth converging setup flagged expect = nonconvergence must
    # come back as a failed check (exit 2), not a silent pass
    scn = _write(
        tmp_path,
        "smooth.scn",
        """
name = smooth
mode = nn
initial = expression -tanh(x)
epsilon_list = 0.2 0.1
T = 0.5
dx = 0.05
domain = -2 2
expect = nonconvergence
""",
    )
    rc = main(["sweep", str(scn), "--outdir", str(tmp_path)])
    assert rc == 2
    rep = json.loads((tmp_path / "smooth_report.json").read_text())
    assert rep["passed"] is False


def test_riemann_subcommand(tmp_path):
    rc = main(
        [
            "riemann", "--uL", "1", "--uR", "0",
            "--epsilon", "0.1", "--T", "1", "--dx", "0.005",
            "--domain", "-1.5", "2.0", "--stride", "50",
            "--outdir", str(tmp_path),
        ]
    )
    assert rc == 0
    rep = json.loads((tmp_path / "riemann_report.json").read_text())
    assert abs(rep["front_speed"]["measured"] - 0.5) <= 0.01


def test_riemann_rejects_bad_domain(tmp_path, capsys):
    rc = main(
        [
            "riemann", "--uL", "1", "--uR", "0",
            "--domain", "2", "-1", "--outdir", str(tmp_path),
        ]
    )
    assert rc == 1


def test_selftest_subset(tmp_path, capsys):
    rc = main(["selftest", "--criteria", "4", "--outdir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "criterion  4 [PASS]" in out
    lines = (tmp_path / "selftest_results.txt").read_text().splitlines()
    assert lines == ["criterion  4 [PASS] catastrophe time"]
    rep = json.loads((tmp_path / "selftest_report.json").read_text())
    assert rep["passed"] is True
    assert rep["criteria"][0]["number"] == 4


def test_selftest_rejects_unknown_criterion(tmp_path):
    rc = main(["selftest", "--criteria", "99", "--outdir", str(tmp_path)])
    assert rc == 1
