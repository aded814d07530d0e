"""Command surface: validate / run / certify / sweep.

A run executes validate -> build -> evolve -> diagnostics -> certify ->
export and writes fields.csv, curves.csv, certificate.txt,
assumptions.txt, summary.txt (and SVG plots when enabled) into the
configured output directory.  Runs are deterministic: identical configs
produce byte-identical CSV outputs.

Exit codes: 0 success, 2 config error, 3 numeric failure (vacuum or CFL
collapse before t_end without a blowup certificate), 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from steepen import charpath, detector, eos, fields, riccati, solver, svg
from steepen.config import (
    ConfigError,
    RunConfig,
    build_config,
    load_config,
    make_initial,
    parse_kv,
)
from steepen.eos import VacuumError
from steepen.expressions import parse_expression
from steepen.riccati import RESIDUAL_KINDS


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.16g}"
    return str(v)


def _write_kv(path: Path, title: str, pairs) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {title}\n")
        for key, value in pairs:
            fh.write(f"{key} = {_fmt(value)}\n")


def _expressions_of(cfg: RunConfig):
    ini = cfg.initial
    return [v for v in (ini.u0, ini.z0, ini.tau0, ini.m0) if v is not None and not v.startswith("file:")]


def validate_config(cfg: RunConfig) -> None:
    """Static checks beyond schema: expression syntax and identifiers."""
    for text in _expressions_of(cfg):
        try:
            parse_expression(text, cfg.params)
        except ValueError as exc:
            raise ConfigError(f"initial block: bad expression {text!r}: {exc}") from None


def _write_fields_csv(path: Path, traj: solver.Trajectory) -> None:
    gc = traj.gc
    with open(path, "w") as fh:
        fh.write("t,x,z,u,m,p,c,alpha,beta,y,q\n")
        for snap in traj.snapshots:
            m = snap.m_arrays()[0]
            p, c = eos.thermo(snap.z, m, gc, snap.z_floor)
            d = riccati.diagnostics(snap)
            for j in range(snap.grid.n):
                fh.write(
                    f"{snap.t:.16g},{snap.grid.x[j]:.16g},{snap.z[j]:.16g},{snap.u[j]:.16g},"
                    f"{m[j]:.16g},{p[j]:.16g},{c[j]:.16g},"
                    f"{d.alpha[j]:.16g},{d.beta[j]:.16g},{d.y[j]:.16g},{d.q[j]:.16g}\n"
                )


def _diagnose(cfg: RunConfig, traj: solver.Trajectory):
    """Trace configured curves and evaluate the selected residuals.

    The residual_max summary is taken on the resolved window
    [0, 0.8*t_stop] for blowup runs; past it the fields leave the grid's
    resolution and residuals are no longer meaningful.
    """
    t_stop = traj.termination.t_stop
    t_resolved = 0.8 * t_stop if traj.termination.kind == "gradient_blowup" else t_stop
    curve_rows = []  # (curve_id, direction, t, x, value, residual)
    residual_max: dict = {}
    curves = []
    for si, seed in enumerate(cfg.diagnostics.seeds):
        for direction in cfg.diagnostics.directions:
            curve = charpath.trace(traj, seed, direction, cfg.diagnostics.substeps)
            curves.append((f"seed{si}_{direction}", curve))
            window = curve.t <= t_resolved
            for kind in cfg.diagnostics.residuals:
                need_dir, measured, _ = RESIDUAL_KINDS[kind]
                if need_dir != direction:
                    continue
                res = riccati.residual(traj, curve, kind)
                values = curve.samples[measured]
                cid = f"seed{si}_{kind}"
                if np.any(window):
                    residual_max[kind] = max(
                        residual_max.get(kind, 0.0), float(np.max(np.abs(res[window])))
                    )
                for i in range(len(curve.t)):
                    curve_rows.append(
                        (cid, direction, curve.t[i], curve.x[i], values[i], res[i])
                    )
    return curves, curve_rows, residual_max


def _certificates(cfg: RunConfig, state0):
    cert14 = cert15 = None
    ths = None
    if cfg.certify.bounds is not None:
        ths = detector.thresholds(cfg.certify.bounds, cfg.gas.gamma, cfg.certify.epsilon)
        cert14 = detector.certify_thm14(state0, cfg.certify.bounds, cfg.certify.epsilon)
    if cfg.certify.A is not None:
        cert15 = detector.certify_thm15(state0, cfg.certify.A, cfg.certify.bounds)
    return ths, cert14, cert15


def _certificate_pairs(cfg: RunConfig, state0, ths, cert14, cert15):
    primary = cert15 if (cert15 is not None and cert15.kind != "none") else cert14
    if primary is None:
        primary = cert15
    pairs = []
    if primary is not None:
        pairs += [
            ("kind", primary.kind),
            ("threshold", primary.threshold),
            ("epsilon", cfg.certify.epsilon),
            ("witness_x", primary.witness_x),
            ("witness_value", primary.witness_value),
            ("t_star_bound", primary.t_star_bound),
            ("conditional_on_assumptions", primary.conditional),
        ]
    else:
        pairs += [("kind", "none"), ("conditional_on_assumptions", True)]
    if ths is not None:
        pairs += [("N", ths.N), ("N_tilde", ths.N_tilde), ("A1", ths.A1), ("A2", ths.A2)]
        m, m_x, m_xx = state0.m_arrays()
        disc = ths.A1 * m_x**2 + ths.A2 * m * m_xx
        pairs.append(("tilde_discriminant_negative_somewhere", bool(np.any(disc < 0.0))))
    if cert14 is not None:
        pairs += [
            ("thm14.kind", cert14.kind),
            ("thm14.threshold", cert14.threshold),
            ("thm14.witness_x", cert14.witness_x),
            ("thm14.witness_value", cert14.witness_value),
        ]
    if cert15 is not None:
        pairs += [
            ("thm15.kind", cert15.kind),
            ("thm15.witness_x", cert15.witness_x),
            ("thm15.witness_value", cert15.witness_value),
            ("thm15.t_star_bound", cert15.t_star_bound),
        ]
    if cfg.certify.bounds is not None:
        b = cfg.certify.bounds
        pairs += [(f"bounds.{k}", getattr(b, k)) for k in ("Z_L", "Z_U", "M1", "M2", "M3", "M4")]
    # the decoupled-ODE coefficients are only measurable along a completed
    # run; certificates are a-priori statements about the initial data
    pairs.append(("coefficients_measured_along_run", "a0,a2 sampled from the run, not predicted"))
    return pairs


def _assumption_pairs(report: fields.AssumptionReport):
    pairs = []
    for check in report:
        pairs.append((f"{check.name}.observed", check.observed))
        pairs.append((f"{check.name}.bound", check.bound))
        pairs.append((f"{check.name}.passed", check.passed))
        if check.t is not None:
            pairs.append((f"{check.name}.t", check.t))
        if check.x is not None:
            pairs.append((f"{check.name}.x", check.x))
    pairs.append(("all_passed", report.all_passed))
    return pairs


def run_pipeline(cfg: RunConfig) -> int:
    validate_config(cfg)
    out = cfg.output.directory
    out.mkdir(parents=True, exist_ok=True)

    try:
        state0, profile = make_initial(cfg)
    except (VacuumError, ValueError) as exc:
        print(f"stage build: {exc}", file=sys.stderr)
        return 3

    traj = solver.evolve(state0, cfg.solver)

    try:
        curves, curve_rows, residual_max = _diagnose(cfg, traj)
    except ValueError as exc:
        print(f"stage diagnostics: {exc}", file=sys.stderr)
        return 3

    ths, cert14, cert15 = _certificates(cfg, state0)
    estimate = detector.detect_blowup(traj)
    report = None
    if cfg.certify.bounds is not None:
        report = fields.validate_assumptions(traj, profile, cfg.certify.bounds)

    _write_fields_csv(out / "fields.csv", traj)
    with open(out / "curves.csv", "w") as fh:
        fh.write("curve_id,direction,t,x,value,residual\n")
        for cid, direction, t, x, v, r in curve_rows:
            fh.write(f"{cid},{direction},{t:.16g},{x:.16g},{v:.16g},{r:.16g}\n")
    _write_kv(out / "certificate.txt", "certificate report",
              _certificate_pairs(cfg, state0, ths, cert14, cert15))
    if report is not None:
        _write_kv(out / "assumptions.txt", "assumption report", _assumption_pairs(report))

    d0 = riccati.diagnostics(traj.snapshots[0])
    drift = solver.conserved_drift(traj, t_max=0.8 * traj.termination.t_stop)
    summary = [
        ("termination", traj.termination.kind),
        ("t_stop", traj.termination.t_stop),
        ("x_loc", traj.termination.x_loc),
        ("steps", traj.steps_taken),
        ("min_y0", float(np.min(d0.y))),
        ("min_q0", float(np.min(d0.q))),
        ("t_blow", None if estimate is None else estimate.t_blow),
        ("t_blow_uncertainty", None if estimate is None else estimate.uncertainty),
        ("certificate", _primary_kind(cert14, cert15)),
        ("t_star_bound", None if cert15 is None else cert15.t_star_bound),
        ("int_u_drift", drift["int_u"]),
        ("int_tau_drift", drift["int_tau"]),
    ]
    summary += [(f"residual_max.{k}", v) for k, v in sorted(residual_max.items())]
    _write_kv(out / "summary.txt", "run summary", summary)

    if cfg.output.emit_svg:
        t_series = traj.times
        min_y = np.array([float(np.min(riccati.diagnostics(s).y)) for s in traj.snapshots])
        min_q = np.array([float(np.min(riccati.diagnostics(s).q)) for s in traj.snapshots])
        svg.line_plot(
            out / "yq_extrema.svg",
            [("min y", t_series, min_y), ("min q", t_series, min_q)],
            title="extrema of the scaled gradient diagnostics",
            xlabel="t", ylabel="min over x",
        )
        svg.line_plot(
            out / "characteristics.svg",
            [(cid, c.t, c.x_path) for cid, c in curves],
            title="traced characteristics",
            xlabel="t", ylabel="x (unwrapped)",
        )

    if traj.termination.kind in ("cfl_collapse", "vacuum_guard") and _primary_kind(cert14, cert15) == "none":
        print(f"numeric failure: {traj.termination.kind} at t={traj.termination.t_stop:g}",
              file=sys.stderr)
        return 3
    return 0


def _primary_kind(cert14, cert15) -> str:
    for cert in (cert15, cert14):
        if cert is not None and cert.kind != "none":
            return cert.kind
    return "none"


def certify_only(cfg: RunConfig) -> int:
    validate_config(cfg)
    if cfg.certify.bounds is None and cfg.certify.A is None:
        print("certify: config has no certify block", file=sys.stderr)
        return 2
    out = cfg.output.directory
    out.mkdir(parents=True, exist_ok=True)
    try:
        state0, profile = make_initial(cfg)
    except (VacuumError, ValueError) as exc:
        print(f"stage build: {exc}", file=sys.stderr)
        return 3
    ths, cert14, cert15 = _certificates(cfg, state0)
    _write_kv(out / "certificate.txt", "certificate report",
              _certificate_pairs(cfg, state0, ths, cert14, cert15))
    if cfg.certify.bounds is not None:
        report = fields.validate_assumptions(state0, profile, cfg.certify.bounds)
        _write_kv(out / "assumptions.txt", "assumption report (initial data only)",
                  _assumption_pairs(report))
    return 0


SWEEP_COLUMNS = (
    "value", "status", "termination", "t_stop", "min_y0", "certificate",
    "t_star_bound", "t_blow", "residual_max",
)


def _is_config_leaf(axis: str, base_kv: dict) -> bool:
    """A sweep axis may be any present key, a params leaf, or a schema key."""
    if axis in base_kv or axis.startswith("params."):
        return True
    from steepen.config import _KNOWN

    if "." not in axis:
        return False
    block, leaf = axis.split(".", 1)
    known = _KNOWN.get(block)
    return known is not None and leaf in known


def sweep(cfg_path: Path, axis: str, values: list[str]) -> int:
    try:
        base_kv = parse_kv(Path(cfg_path).read_text())
        base_cfg = load_config(cfg_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if not _is_config_leaf(axis, base_kv):
        print(f"sweep: axis {axis!r} is not a config leaf", file=sys.stderr)
        return 2

    base_cfg.output.directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for value in values:
        kv = dict(base_kv)
        kv[axis] = value
        sub = f"{axis.replace('.', '_')}={value}"
        kv["output.directory"] = str(Path(base_kv["output.directory"]) / sub)
        row = {"value": value, "status": "ok", "termination": "", "t_stop": "",
               "min_y0": "", "certificate": "", "t_star_bound": "", "t_blow": "",
               "residual_max": ""}
        try:
            cfg = build_config(kv, base_cfg.base_dir)
            code = run_pipeline(cfg)
            if code != 0:
                row["status"] = f"exit{code}"
            summary = _read_kv(cfg.output.directory / "summary.txt")
            for col in ("termination", "t_stop", "min_y0", "certificate", "t_star_bound", "t_blow"):
                row[col] = summary.get(col, "")
            res = [f"{k.split('.', 1)[1]}:{v}" for k, v in summary.items() if k.startswith("residual_max.")]
            row["residual_max"] = ";".join(res)
        except Exception as exc:  # per-run failures recorded, sweep continues
            row["status"] = f"error: {exc}"
        rows.append(row)

    table_path = base_cfg.output.directory / "sweep_summary.csv"
    header = ["axis"] + list(SWEEP_COLUMNS)
    with open(table_path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join([axis] + [str(row[c]).replace(",", ";") for c in SWEEP_COLUMNS]) + "\n")
    print(table_path.read_text(), end="")
    return 0


def _read_kv(path: Path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0].strip()
        if body and "=" in body:
            k, v = body.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="steepen",
        description="smooth-wave steepening laboratory for 1-D Lagrangian gas dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "run", "certify"):
        p = sub.add_parser(name)
        p.add_argument("config", type=Path)
    p = sub.add_parser("sweep")
    p.add_argument("config", type=Path)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated leaf values")
    args = parser.parse_args(argv)

    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            validate_config(cfg)
            print("config ok")
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
            return run_pipeline(cfg)
        if args.command == "certify":
            cfg = load_config(args.config)
            return certify_only(cfg)
        values = [v for v in args.values.split(",") if v.strip()]
        return sweep(args.config, args.axis, values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except (VacuumError, ValueError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
