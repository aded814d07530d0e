import xml.etree.ElementTree as ET

import numpy as np
import pytest

from steepen import cli


RUN_CFG = """\
gas.gamma = 3
gas.K = 0.3333333333333333
grid.x0 = 0
grid.x1 = 1
grid.n = 64
params.amp = 0.2
initial.u0 = -amp*sin(2*pi*x)
initial.z0 = 1
initial.m0 = 1
solver.t_end = 0.3
solver.gradient_cap = 30
solver.snapshot_stride = 5
diagnostics.seeds = 0.1, 0.6
diagnostics.residuals = ode_y, ode_q
certify.Z_L = 0.2
certify.Z_U = 3
certify.M1 = 0.5
certify.M2 = 1.5
certify.M3 = 0
certify.M4 = 0
certify.A = 0.25
output.directory = out
output.emit_svg = true
"""


@pytest.fixture()
def cfg_path(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(RUN_CFG)
    return path


def test_validate_ok(cfg_path, capsys):
    assert cli.main(["validate", str(cfg_path)]) == 0
    assert "config ok" in capsys.readouterr().out


def test_validate_rejects_bad_expression(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text(RUN_CFG.replace("-amp*sin(2*pi*x)", "sin(+)"))
    assert cli.main(["validate", str(path)]) == 2


def test_run_writes_all_outputs(cfg_path, tmp_path):
    assert cli.main(["run", str(cfg_path)]) == 0
    out = tmp_path / "out"
    for name in (
        "fields.csv", "curves.csv", "certificate.txt", "assumptions.txt",
        "summary.txt", "yq_extrema.svg", "characteristics.svg",
    ):
        assert (out / name).exists(), name
    header = (out / "fields.csv").read_text().splitlines()[0]
    assert header == "t,x,z,u,m,p,c,alpha,beta,y,q"
    header_c = (out / "curves.csv").read_text().splitlines()[0]
    assert header_c == "curve_id,direction,t,x,value,residual"
    for name in ("yq_extrema.svg", "characteristics.svg"):
        ET.fromstring((out / name).read_text())  # well-formed XML


def test_run_values_carry_at_least_12_significant_digits(cfg_path, tmp_path):
    assert cli.main(["run", str(cfg_path)]) == 0
    row = (tmp_path / "out" / "fields.csv").read_text().splitlines()[2].split(",")
    u_text = row[3]
    assert abs(float(u_text) - (-0.2 * np.sin(2.0 * np.pi * float(row[1])))) <= 1e-12
    mantissa = u_text.lstrip("-0.").replace(".", "").split("e")[0]
    assert len(mantissa) >= 12


def test_run_byte_identical(cfg_path, tmp_path):
    assert cli.main(["run", str(cfg_path)]) == 0
    first = {
        name: (tmp_path / "out" / name).read_bytes()
        for name in ("fields.csv", "curves.csv", "summary.txt", "certificate.txt")
    }
    assert cli.main(["run", str(cfg_path)]) == 0
    for name, blob in first.items():
        assert (tmp_path / "out" / name).read_bytes() == blob, name


def test_config_error_exit_2_and_no_outputs(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text(RUN_CFG.replace("gas.gamma = 3", "gas.gamma = 1"))
    assert cli.main(["run", str(path)]) == 2
    assert not (tmp_path / "out").exists()


def test_missing_config_exit_2(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.cfg")]) == 2


def test_numeric_failure_exit_3(tmp_path):
    path = tmp_path / "vac.cfg"
    path.write_text(RUN_CFG.replace("initial.z0 = 1", "initial.tau0 = -1"))
    assert cli.main(["run", str(path)]) == 3


def test_cfl_collapse_without_certificate_exit_3(tmp_path):
    text = RUN_CFG.replace("params.amp = 0.2", "params.amp = 0.0001")
    text = text.replace("solver.t_end = 0.3", "solver.t_end = 0.3\nsolver.dt_min = 1\n")
    path = tmp_path / "collapse.cfg"
    path.write_text(text)
    assert cli.main(["run", str(path)]) == 3


def test_io_error_exit_4(tmp_path):
    path = tmp_path / "io.cfg"
    path.write_text(RUN_CFG)
    (tmp_path / "out").write_text("not a directory")
    assert cli.main(["run", str(path)]) == 4


def test_certificate_report_contents(cfg_path, tmp_path):
    assert cli.main(["certify", str(cfg_path)]) == 0
    out = tmp_path / "out"
    assert not (out / "fields.csv").exists()  # no evolution
    report = dict(
        line.split(" = ")
        for line in (out / "certificate.txt").read_text().splitlines()
        if " = " in line
    )
    assert report["kind"] == "thm15_y"
    assert report["conditional_on_assumptions"] == "false"  # gamma = 3
    assert float(report["t_star_bound"]) > 0.0
    assert float(report["epsilon"]) == 0.01  # the configured sharpness, always reported
    assert report["thm14.kind"] == "thm14_y"
    assert float(report["N"]) == 0.0  # M3 = M4 = 0
    assert report["bounds.Z_U"] == "3"


def test_sweep_summary_rows(cfg_path, tmp_path, capsys):
    assert cli.main(["sweep", str(cfg_path), "--axis", "grid.n", "--values", "32,64"]) == 0
    table = (tmp_path / "out" / "sweep_summary.csv").read_text().splitlines()
    assert table[0].startswith("axis,value,status")
    assert len(table) == 3
    assert (tmp_path / "out" / "grid_n=32" / "summary.txt").exists()
    assert (tmp_path / "out" / "grid_n=64" / "summary.txt").exists()
    out = capsys.readouterr().out
    assert "grid.n,32" in out


def test_sweep_empty_values(cfg_path, tmp_path):
    assert cli.main(["sweep", str(cfg_path), "--axis", "grid.n", "--values", ","]) == 0
    table = (tmp_path / "out" / "sweep_summary.csv").read_text().splitlines()
    assert len(table) == 1  # header only


def test_sweep_records_per_run_failures(cfg_path, tmp_path):
    code = cli.main(["sweep", str(cfg_path), "--axis", "gas.gamma", "--values", "3,1"])
    assert code == 0
    rows = (tmp_path / "out" / "sweep_summary.csv").read_text().splitlines()
    assert len(rows) == 3
    assert "error" in rows[2]


def test_sweep_unknown_axis(cfg_path):
    assert cli.main(["sweep", str(cfg_path), "--axis", "gas.R", "--values", "1"]) == 2


def test_sweep_amplitude_crosses_certificate_threshold(tmp_path):
    """The thm14 certificate appears exactly past the threshold amplitude."""
    text = RUN_CFG.replace("certify.M3 = 0", "certify.M3 = 1").replace("certify.M4 = 0", "certify.M4 = 1")
    text = text.replace("solver.t_end = 0.3", "solver.t_end = 0.05")
    text = text.replace("certify.A = 0.25\n", "")  # thm14 only: the column should flip
    path = tmp_path / "sweep.cfg"
    path.write_text(text)
    from steepen import detector
    from steepen.fields import AssumptionBounds

    n_threshold = detector.thresholds(
        AssumptionBounds(Z_L=0.2, Z_U=3.0, M1=0.5, M2=1.5, M3=1.0, M4=1.0), 3.0, 0.01
    ).N
    a_crit = n_threshold / (2.0 * np.pi)  # min y0 = -2 pi a
    lo, hi = 0.8 * a_crit, 1.2 * a_crit
    assert cli.main(["sweep", str(path), "--axis", "params.amp", "--values", f"{lo},{hi}"]) == 0
    rows = (tmp_path / "out" / "sweep_summary.csv").read_text().splitlines()
    assert "none" in rows[1]
    assert "thm14_y" in rows[2]


def test_sweep_axis_may_be_schema_default_leaf(cfg_path, tmp_path):
    # solver.cfl is absent from the config text but is a valid leaf
    assert cli.main(["sweep", str(cfg_path), "--axis", "solver.cfl", "--values", "0.3,0.5"]) == 0
    rows = (tmp_path / "out" / "sweep_summary.csv").read_text().splitlines()
    assert len(rows) == 3
    assert all("ok" in r for r in rows[1:])
