"""Execute parsed scenarios: solve, check, and serialise.

Output files per run, all deterministic byte for byte (no wall clock,
no machine identity, thread count changes nothing):

    <name>.csv           snapshots, columns t,x,u (x,y,u for nn2d,
                         t,x,rho,v for euler); .json with the same
                         numbers when output = json
    <name>_report.json   checks and measurements; leading keys name the
                         version, scenario, mode, epsilon, dx, dt
    <name>_profile.dat   plot-ready two columns (final profile)
    <name>_table.dat     sweeps only: eps vs errors, plot-ready

Exit status: 0 all mode-required checks pass, 1 input error (nothing
written), 2 check failure or solver abort.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    ConvergenceRow,
    ConvergenceTable,
    DiagnosticsReport,
    MultipleCrossingsError,
    NoCrossingError,
    check_invariants,
    measure_front_speed_fit,
    padded_grid_bounds,
)
from .euler import conservative_residual, solve_isentropic
from .fluxes import FluxSpec, burgers_flux, cubic_flux
from .grids import (
    PiecewiseInitialData,
    RiemannData,
    l1_distance,
    sample,
    sup_norm,
)
from .reference import godunov_solve, lax_oleinik_solve, burgers_riemann_exact
from .scenario import (
    ExpressionData,
    PiecewiseData,
    RiemannSpec,
    ScenarioError,
    ScenarioSpec,
    parse_scenario,
)
from .solver import (
    CFLViolationError,
    PicardDivergenceError,
    SolverConfig,
    solve_conservative_nonlocal,
    solve_general,
    solve_nn,
)
from .kernel import ResolutionError
from .twodim import sample_2d, solve_velocity_reg_2d, tv_2d

__all__ = [
    "EXIT_CHECK_FAILED",
    "EXIT_INPUT_ERROR",
    "EXIT_OK",
    "run",
    "run_file",
    "thread_cap",
]

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CHECK_FAILED = 2

_RUN_ERRORS = (
    CFLViolationError,
    PicardDivergenceError,
    ResolutionError,
    NoCrossingError,
    MultipleCrossingsError,
)


def thread_cap() -> int:
    """Sweep parallelism cap from NLCLAW_THREADS (positive integer)."""
    raw = os.environ.get("NLCLAW_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ScenarioError(
            [f"NLCLAW_THREADS={raw!r} is not a positive integer"]
        ) from None
    if n < 1:
        raise ScenarioError(
            [f"NLCLAW_THREADS={raw!r} is not a positive integer"]
        )
    return n


def _initial_object(spec: ScenarioSpec):
    init = spec.initial
    if isinstance(init, RiemannSpec):
        return RiemannData(init.uL, init.uR)
    if isinstance(init, PiecewiseData):
        return PiecewiseInitialData(
            init.breakpoints, init.pieces, lipschitz_C=init.lipschitz_C
        )
    return init.expr


def _flux_spec(spec: ScenarioSpec, radius: float) -> FluxSpec:
    fc = spec.flux
    if fc.kind == "burgers":
        return burgers_flux(radius=radius)
    if fc.kind == "cubic":
        return cubic_flux(radius=radius)
    # expression pair: estimate the Lipschitz constant of f' by sampled
    # differences over the working range
    z = np.linspace(-radius, radius, 4001)
    fp = fc.fprime(z)
    M = float(np.max(np.abs(np.diff(fp))) / (z[1] - z[0]))
    return FluxSpec(
        fc.f, fc.fprime, lipschitz_M=max(M, 1e-12) * 1.05, radius=radius,
        name="expression",
    )


def _predicted_front_speed(spec: ScenarioSpec, flux: FluxSpec) -> float | None:
    """Front speed of the regularised schemes on a decreasing Riemann
    datum: mode-dependent, not the Rankine-Hugoniot value.  None when no
    closed-form prediction is claimed (conservative variant)."""
    uL, uR = spec.initial.uL, spec.initial.uR
    if spec.mode == "nn":
        return 0.5 * (uL + uR)
    if spec.mode == "velocity_reg":
        return 0.5 * float(flux.fprime(uL) + flux.fprime(uR))
    if spec.mode == "flux_reg":
        return float(flux.fprime(0.5 * (uL + uR)))
    return None


def _solve_1d(spec, u0, data, flux, epsilon, cfg):
    if spec.mode == "nn":
        return solve_nn(u0, epsilon, spec.T, cfg, data=data)
    if spec.mode == "conservative":
        return solve_conservative_nonlocal(u0, epsilon, spec.T, cfg)
    return solve_general(
        u0, flux, epsilon, spec.T, cfg, spec.mode, data=data
    )


def _meta(spec, epsilon, dx, dt) -> dict:
    return {
        "version": __version__,
        "scenario": spec.name,
        "mode": spec.mode,
        "epsilon": epsilon,
        "dx": dx,
        "dt": dt,
    }


def _meta_lines(meta: dict) -> list[str]:
    return [
        f"# nlclaw {meta['version']}",
        "# scenario={scenario} mode={mode} epsilon={epsilon} dx={dx} "
        "dt={dt}".format(**meta),
    ]


class RunResult:
    """Everything one scenario run produced, ready to serialise."""

    def __init__(self, meta: dict, report: dict):
        self.meta = meta
        self.report = report
        self.snapshot_columns: tuple = ()
        self.snapshot_rows = None  # list of row tuples
        self.profile = None  # (label, 2-column array)
        self.table_rows = None  # sweep: list of dicts
        self.extra_snapshots = []  # sweep: (suffix, meta, columns, rows)

    @property
    def passed(self) -> bool:
        return bool(self.report.get("passed", False))


def _trajectory_rows(traj) -> list:
    rows = []
    for t, st in zip(traj.times, traj.states):
        x = st.x
        v = st.values
        rows.extend(
            (float(t), float(x[i]), float(v[i])) for i in range(x.size)
        )
    return rows


def _run_1d_single(spec: ScenarioSpec, verify_only: bool) -> RunResult:
    data = _initial_object(spec)
    a, b = spec.domain
    u0 = sample(data, a, b, spec.dx)
    radius = max(1.0, 1.5 * sup_norm(u0))
    flux = _flux_spec(spec, radius)
    cfg = SolverConfig(cfl=spec.cfl, store_stride=spec.stride)
    epsilon = spec.epsilon
    traj = _solve_1d(spec, u0, data, flux, epsilon, cfg)
    dt = cfg.time_step(spec.dx, sup_norm(u0))

    rep = check_invariants(traj)
    front = None
    if (
        isinstance(spec.initial, RiemannSpec)
        and spec.initial.uL > spec.initial.uR
    ):
        predicted = _predicted_front_speed(spec, flux)
        level = 0.5 * (spec.initial.uL + spec.initial.uR)
        fit = measure_front_speed_fit(
            traj, level, (0.5 * spec.T, spec.T)
        )
        front = {
            "measured": fit.speed,
            "stderr": fit.stderr,
            "predicted": predicted,
        }
        if predicted is not None and abs(predicted) > 1e-12:
            rep.add(
                "front_speed",
                abs(fit.speed - predicted) <= 0.02 * abs(predicted),
                fit.speed,
                predicted,
                detail="within 2% of the mode's predicted speed",
            )

    meta = _meta(spec, epsilon, spec.dx, dt)
    report = dict(meta)
    report["checks"] = rep.as_dict()
    if front is not None:
        report["front_speed"] = front
    report["passed"] = rep.passed
    res = RunResult(meta, report)
    if not verify_only:
        res.snapshot_columns = ("t", "x", "u")
        res.snapshot_rows = _trajectory_rows(traj)
        fin = traj.final
        res.profile = (
            ("x", "u"),
            np.column_stack([fin.x, fin.values]),
        )
    return res


def _sweep_reference(spec: ScenarioSpec, u0, data, flux):
    if spec.expect == "nonconvergence" and isinstance(data, RiemannData):
        return u0.with_values(
            np.asarray(burgers_riemann_exact(data, u0.x / spec.T))
        ), "fan"
    if spec.flux.kind == "burgers":
        return lax_oleinik_solve(u0, spec.T), "lax_oleinik"
    return godunov_solve(u0, flux, spec.T).final, "godunov"


def _run_sweep(spec: ScenarioSpec, verify_only: bool) -> RunResult:
    data = _initial_object(spec)
    cfg = SolverConfig(cfl=spec.cfl, store_stride=spec.stride)
    eps_sorted = sorted(set(spec.epsilon_list), reverse=True)

    def one(eps):
        dx = min(spec.dx, eps / 8.0)
        probe = sample(data, spec.domain[0], spec.domain[1], dx)
        sup0 = sup_norm(probe)
        radius = max(1.0, 1.5 * sup0)
        flux = _flux_spec(spec, radius)
        a, b = padded_grid_bounds(spec.domain, sup0, eps, spec.T, cfg, dx)
        u0 = sample(data, a, b, dx)
        traj = _solve_1d(spec, u0, data, flux, eps, cfg)
        ref, ref_name = _sweep_reference(spec, u0, data, flux)
        sl = u0.window_slice(*spec.domain)
        diff = np.abs(traj.final.values - ref.values)[sl]
        err_l1 = float(np.sum(diff) * dx)
        err_sup = float(np.max(diff))
        rep = check_invariants(traj)
        dt = cfg.time_step(dx, sup_norm(u0))
        return eps, dx, dt, err_l1, err_sup, rep, ref_name, traj

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        results = list(pool.map(one, eps_sorted))

    rows = []
    run_reports = []
    ref_name = results[0][6]
    passed = True
    for eps, dx, dt, err_l1, err_sup, rep, ref_name, traj in results:
        rows.append(
            ConvergenceRow(eps, dx, dt, err_l1, err_sup, err_l1 <= 10.0 * dx)
        )
        run_reports.append({"epsilon": eps, "checks": rep.as_dict()})
        passed = passed and rep.passed
    table = ConvergenceTable(rows, 0.0, ref_name, "l1")
    table.fitted_rate = table.fit_rate("l1", n_points=3)

    meta = _meta(spec, list(eps_sorted), spec.dx, None)
    report = dict(meta)
    report["table"] = table.as_dict()
    report["runs"] = run_reports
    if spec.expect == "nonconvergence":
        slope_all = table.fit_rate("l1", n_points=None)
        plateau = abs(slope_all) <= 0.1
        report["nonconvergence"] = {
            "slope_all_rows": slope_all,
            "passed": bool(plateau),
        }
        passed = passed and plateau
    report["passed"] = passed

    res = RunResult(meta, report)
    if not verify_only:
        res.table_rows = [r.as_dict() for r in rows]
        for (eps, dx, dt, _, _, _, _, traj) in results:
            sub_meta = _meta(spec, eps, dx, dt)
            res.extra_snapshots.append(
                (f"eps{eps!r}", sub_meta, ("t", "x", "u"),
                 _trajectory_rows(traj))
            )
    return res


def _run_euler(spec: ScenarioSpec, verify_only: bool) -> RunResult:
    a, b = spec.domain
    rho0 = sample(spec.initial.expr, a, b, spec.dx)
    if spec.velocity is not None:
        vel0 = sample(spec.velocity, a, b, spec.dx)
    else:
        vel0 = rho0.with_values(np.zeros(rho0.n))
    cfg = SolverConfig(cfl=spec.cfl, store_stride=spec.stride)
    tr = solve_isentropic(rho0, vel0, spec.epsilon, spec.T, cfg)
    r1, r2 = conservative_residual(tr.states, tr.times)
    rep_mu = check_invariants(tr.mu_trajectory)
    rep_lam = check_invariants(tr.lam_trajectory)
    merged = DiagnosticsReport(mode="euler")
    for prefix, rep in (("mu", rep_mu), ("lam", rep_lam)):
        for c in rep.checks:
            merged.add(
                f"{prefix}_{c.name}", c.passed, c.value, c.threshold, c.detail
            )
    meta = _meta(spec, spec.epsilon, spec.dx, tr.dt)
    report = dict(meta)
    report["checks"] = merged.as_dict()
    report["conservative_residual"] = {"mass": r1, "momentum": r2}
    report["vacuum_flagged"] = bool(any(s.has_vacuum for s in tr.states))
    report["passed"] = merged.passed
    res = RunResult(meta, report)
    if not verify_only:
        rows = []
        for t, st in zip(tr.times, tr.states):
            x = st.mu.x
            rho = st.rho.values
            vel = st.vel.values
            rows.extend(
                (float(t), float(x[i]), float(rho[i]), float(vel[i]))
                for i in range(x.size)
            )
        res.snapshot_columns = ("t", "x", "rho", "v")
        res.snapshot_rows = rows
        fin = tr.final
        res.profile = (
            ("x", "rho"),
            np.column_stack([fin.mu.x, fin.rho.values]),
        )
    return res


def _run_2d(spec: ScenarioSpec, verify_only: bool) -> RunResult:
    a, b = spec.domain
    ya, yb = spec.domain_y if spec.domain_y is not None else spec.domain
    init = spec.initial
    if isinstance(init, RiemannSpec):
        data2 = lambda X, Y: np.where(X <= 0.0, init.uL, init.uR)
    elif isinstance(init, ExpressionData):
        data2 = lambda X, Y: init.expr(X) + 0.0 * Y
    else:
        pw = _initial_object(spec)
        data2 = lambda X, Y: pw(X) + 0.0 * Y
    u0 = sample_2d(data2, a, b, ya, yb, spec.dx, spec.dx)
    probe_sup = float(np.max(np.abs(u0.values)))
    flux = _flux_spec(spec, max(1.0, 1.5 * probe_sup))
    cfg = SolverConfig(cfl=spec.cfl, store_stride=spec.stride)
    tr = solve_velocity_reg_2d(u0, (flux, flux), spec.epsilon, spec.T, cfg)
    fin = tr.final
    lo0, hi0 = float(np.min(u0.values)), float(np.max(u0.values))
    lo, hi = float(np.min(fin.values)), float(np.max(fin.values))
    tv0 = tv_2d(u0)
    tvT = tv_2d(fin)
    rep = DiagnosticsReport(mode="nn2d")
    rep.add(
        "max_principle", lo >= lo0 and hi <= hi0, max(hi - hi0, lo0 - lo),
        0.0, detail="range of u(T) inside range of u0, exactly",
    )
    rep.add(
        "tv_growth", tvT <= 1.05 * tv0 + 1e-12, tvT, 1.05 * tv0,
        detail="terminal 2D total variation within 5% of initial",
    )
    dt = cfg.time_step(spec.dx, probe_sup)
    meta = _meta(spec, spec.epsilon, spec.dx, dt)
    report = dict(meta)
    report["checks"] = rep.as_dict()
    report["tv"] = {"initial": tv0, "final": tvT}
    report["passed"] = rep.passed
    res = RunResult(meta, report)
    if not verify_only:
        x = u0.x
        y = u0.y
        rows = []
        for j in range(y.size):
            vals = fin.values[j]
            rows.extend(
                (float(x[i]), float(y[j]), float(vals[i]))
                for i in range(x.size)
            )
        res.snapshot_columns = ("x", "y", "u")
        res.snapshot_rows = rows
        mid = fin.values[y.size // 2]
        res.profile = (("x", "u"), np.column_stack([x, mid]))
    return res


def execute(spec: ScenarioSpec, verify_only: bool = False) -> RunResult:
    if spec.mode == "euler":
        return _run_euler(spec, verify_only)
    if spec.mode == "nn2d":
        return _run_2d(spec, verify_only)
    if spec.epsilon_list is not None:
        return _run_sweep(spec, verify_only)
    return _run_1d_single(spec, verify_only)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_snapshots(base: Path, meta, columns, rows, output: str) -> Path:
    # names may contain dots (eps values), so build suffixes by hand
    path = base.parent / (base.name + "." + output)
    if output == "json":
        body = {
            **meta,
            "columns": list(columns),
            "rows": [[float(v) for v in row] for row in rows],
        }
        path.write_text(json.dumps(body, indent=2) + "\n")
        return path
    lines = _meta_lines(meta)
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_outputs(
    spec: ScenarioSpec, res: RunResult, outdir: Path,
    verify_only: bool = False,
) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = outdir / f"{spec.name}_report.json"
    report_path.write_text(json.dumps(res.report, indent=2) + "\n")
    written.append(report_path)
    if verify_only:
        return written

    if res.snapshot_rows is not None:
        written.append(_write_snapshots(
            outdir / spec.name, res.meta, res.snapshot_columns,
            res.snapshot_rows, spec.output,
        ))
    for suffix, sub_meta, columns, rows in res.extra_snapshots:
        written.append(_write_snapshots(
            outdir / f"{spec.name}_{suffix}", sub_meta, columns, rows,
            spec.output,
        ))

    if res.profile is not None:
        labels, arr = res.profile
        lines = _meta_lines(res.meta)
        lines.append("# " + " ".join(labels))
        lines.extend(
            " ".join(repr(float(v)) for v in row) for row in arr
        )
        ppath = outdir / f"{spec.name}_profile.dat"
        ppath.write_text("\n".join(lines) + "\n")
        written.append(ppath)

    if res.table_rows is not None:
        lines = _meta_lines(res.meta)
        lines.append("# epsilon dx dt error_L1 error_sup floor_dominated")
        for r in res.table_rows:
            lines.append(
                " ".join(
                    _fmt(r[k])
                    for k in (
                        "epsilon", "dx", "dt", "error_L1", "error_sup",
                        "floor_dominated",
                    )
                )
            )
        tpath = outdir / f"{spec.name}_table.dat"
        tpath.write_text("\n".join(lines) + "\n")
        written.append(tpath)
    return written


def run(spec: ScenarioSpec, outdir, verify_only: bool = False) -> int:
    """Execute one validated scenario and write its result files."""
    try:
        res = execute(spec, verify_only=verify_only)
    except ScenarioError as e:
        for msg in e.errors:
            print(msg, file=sys.stderr)
        return EXIT_INPUT_ERROR
    except _RUN_ERRORS as e:
        print(f"run failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    write_outputs(spec, res, Path(outdir), verify_only=verify_only)
    return EXIT_OK if res.passed else EXIT_CHECK_FAILED


def run_file(path, outdir, verify_only: bool = False) -> int:
    """Parse a scenario file and run it; input errors write nothing."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        print(f"cannot read {path}: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        spec = parse_scenario(text)
    except ScenarioError as e:
        for msg in e.errors:
            print(f"{path}: {msg}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return run(spec, outdir, verify_only=verify_only)
