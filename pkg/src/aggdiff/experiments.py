"""Experiment presets and output serialization.

Each preset owns a directory layout under the configured output_dir:

  single       series.ndjson, snapshot CSVs, report.json, config_echo.cfg,
               figures/
  blowup       single-run outputs plus characteristics.csv and the derived
               blowup bound in the report
  eps_sweep    one subdirectory per regularization level plus
               sweep_summary.csv
  convergence  convergence.csv: L2 error against a finer reference per grid
  convcheck    convcheck.csv and convcheck_closed_forms.csv: fast kernel
               convolution vs direct-sum and quadrature ground truth

Exit codes: 0 clean completion (or a confirmed blowup in the blowup
preset), 2 bound or tolerance violations, 3 numerical failure outside a
blowup experiment, 4 I/O failure.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Optional

import numpy as np

from . import figures
from .characteristics import BlowupReport, CharacteristicTracker
from .config import RunConfigFile, format_config_echo
from .diagnostics import RunReport, fit_blowup_time
from .grid import Field, Grid, lp_norm
from .initial import build_initial_condition
from .kernel import conv_dk, conv_dk_direct, conv_k, conv_k_direct, KernelSpec
from .oracle import OracleConfig, indicator, quadrature_conv, reference_solve
from .solver import SolverConfig, Status, run

__all__ = ["run_experiment", "check_experiment"]

EXIT_OK = 0
EXIT_BOUNDS = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

N_TRACKED_PARTICLES = 64
CONV_REL_TOL = 1e-12
CLOSED_FORM_TOL = 5e-3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class _SnapshotCollector:
    """Captures the field at the first record past each requested time."""

    def __init__(self, times):
        self.pending = sorted(times)
        self.captured: list[tuple[float, Field]] = []
        self.last_state = None

    def on_record(self, record, state) -> None:
        self.last_state = state
        while self.pending and state.t >= self.pending[0] - 1e-15:
            self.captured.append((self.pending.pop(0), state.u))


def _solver_config(cfg: RunConfigFile, grid: Grid, epsilon: Optional[float] = None) -> SolverConfig:
    return SolverConfig(
        grid=grid,
        t_end=cfg.t_end,
        epsilon=cfg.epsilon if epsilon is None else epsilon,
        r_coeff=cfg.r_coeff,
        cfl=cfg.cfl,
        dt_min=cfg.dt_min,
        grad_blowup_factor=cfg.grad_blowup_factor,
        output_stride=cfg.output_stride,
    )


def _initial_field(cfg: RunConfigFile, grid: Grid) -> Field:
    return build_initial_condition(
        grid,
        cfg.ic_kind,
        cfg.ic_L,
        amplitude=cfg.ic_amplitude,
        mass=cfg.ic_mass,
        sigma=cfg.ic_sigma,
        ramp=cfg.ic_ramp,
        path=cfg.ic_path,
    )


def _echo_dict(cfg: RunConfigFile) -> dict:
    out = {}
    for f in dataclasses.fields(RunConfigFile):
        val = getattr(cfg, f.name)
        if val is None or (isinstance(val, list) and not val):
            continue
        out[f.name] = val
    return out


def _report_dict(report: RunReport) -> dict:
    return {
        "records": [dataclasses.asdict(r) for r in report.records],
        "status": report.status.value,
        "blowup": dataclasses.asdict(report.blowup) if report.blowup else None,
        "config_echo": report.config_echo,
        "bound_violations": [dataclasses.asdict(v) for v in report.bound_violations],
        "notes": report.notes,
    }


def _write_series(path: Path, report: RunReport) -> None:
    with open(path, "w") as fh:
        for rec in report.records:
            fh.write(json.dumps(dataclasses.asdict(rec)) + "\n")


def _write_snapshot(path: Path, field: Field) -> None:
    with open(path, "w") as fh:
        fh.write("x,u\n")
        for x, u in zip(field.grid.nodes, field.values):
            fh.write(f"{_fmt(x)},{_fmt(u)}\n")


def _write_report(path: Path, report: RunReport) -> None:
    with open(path, "w") as fh:
        json.dump(_report_dict(report), fh, indent=2)
        fh.write("\n")


def _write_characteristics(path: Path, tracker: CharacteristicTracker) -> None:
    with open(path, "w") as fh:
        fh.write("t," + ",".join(_fmt(a) for a in tracker.labels) + "\n")
        for t, pos in tracker.history:
            fh.write(_fmt(t) + "," + ",".join(_fmt(p) for p in pos) + "\n")


def _exit_code(cfg: RunConfigFile, report: RunReport) -> int:
    if report.bound_violations:
        return EXIT_BOUNDS
    if report.status is Status.DT_UNDERFLOW and cfg.experiment != "blowup":
        return EXIT_NUMERICAL
    return EXIT_OK


def _execute_single(cfg: RunConfigFile, with_tracker: bool):
    grid = Grid(cfg.half_width, cfg.n_nodes)
    scfg = _solver_config(cfg, grid)
    u0 = _initial_field(cfg, grid)
    snaps = _SnapshotCollector(cfg.snapshot_times)
    tracker = None
    if with_tracker:
        labels = np.linspace(-cfg.ic_L, cfg.ic_L, N_TRACKED_PARTICLES)
        tracker = CharacteristicTracker(labels, grid, scfg.kernel)
    report = run(u0, scfg, sinks=(snaps,), tracker=tracker, config_echo=_echo_dict(cfg))
    if with_tracker:
        final = report.records[-1]
        observed_t = (
            final.t if report.status in (Status.BLOWUP_DETECTED, Status.DT_UNDERFLOW) else None
        )
        mass0 = report.records[0].mass
        report.blowup = BlowupReport.build(
            support_half_width=cfg.ic_L,
            initial_mass=mass0,
            observed_blowup_time=observed_t,
            observed_final_grad_inf=final.grad_inf,
            observed_sup_norm_max=max(r.norm_inf for r in report.records),
        )
        fitted = fit_blowup_time(report.records)
        # an intercept far beyond the horizon means the gradient has
        # plateaued and the reciprocal fit carries no information
        if fitted is not None and fitted <= 10.0 * final.t:
            report.notes.append(f"gradient-fit blowup time estimate (advisory): {fitted:.6g}")
        if tracker.order_violations:
            report.notes.append(
                f"characteristic ordering violated at t={tracker.order_violations[0]:.6g}"
            )
    return grid, u0, snaps, tracker, report


def _write_single_outputs(out: Path, cfg: RunConfigFile, u0, snaps, tracker, report) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _write_series(out / "series.ndjson", report)
    for t_req, fld in snaps.captured:
        _write_snapshot(out / f"snapshot_t{_fmt(t_req)}.csv", fld)
    if snaps.last_state is not None:
        _write_snapshot(out / "snapshot_final.csv", snaps.last_state.u)
    _write_report(out / "report.json", report)
    (out / "config_echo.cfg").write_text(format_config_echo(cfg))
    if tracker is not None:
        _write_characteristics(out / "characteristics.csv", tracker)
    u_final = snaps.last_state.u.values if snaps.last_state is not None else u0.values
    figures.save_run_figures(
        out / "figures",
        u0.grid.nodes,
        u0.values,
        u_final,
        [(t, f.values) for t, f in snaps.captured],
        report.records,
    )
    if tracker is not None and tracker.history:
        figures.save_characteristics_figure(out / "figures", tracker.history)


def _print_summary(cfg: RunConfigFile, report: RunReport) -> None:
    final = report.records[-1]
    print(
        f"[{cfg.experiment}] status={report.status.value} t={final.t:.6g} "
        f"records={len(report.records)} violations={len(report.bound_violations)}"
    )
    if report.blowup is not None:
        b = report.blowup
        obs = "none" if b.observed_blowup_time is None else f"{b.observed_blowup_time:.6g}"
        print(
            f"  blowup bound {b.blowup_time_upper_bound:.6g} "
            f"(edge speed floor {b.boundary_speed_lower_bound:.6g}), observed {obs}, "
            f"final max|du/dx| {b.observed_final_grad_inf:.6g}"
        )
    for note in report.notes:
        print(f"  note: {note}")
    for v in report.bound_violations[:5]:
        print(f"  violation {v.bound} at t={v.t:.6g}: {v.measured:.6g} vs {v.allowed:.6g}")


def _run_single_experiment(cfg: RunConfigFile, write: bool) -> int:
    with_tracker = cfg.experiment == "blowup"
    _, u0, snaps, tracker, report = _execute_single(cfg, with_tracker)
    _print_summary(cfg, report)
    if write:
        _write_single_outputs(Path(cfg.output_dir), cfg, u0, snaps, tracker, report)
    return _exit_code(cfg, report)


def _run_eps_sweep(cfg: RunConfigFile, write: bool) -> int:
    base_eps = cfg.epsilon if cfg.epsilon > 0 else 1e-2
    eps_levels = [base_eps, base_eps / 2.0, base_eps / 4.0]
    out = Path(cfg.output_dir)
    finals: list[Field] = []
    worst = EXIT_OK
    for eps in eps_levels:
        sub = dataclasses.replace(cfg, epsilon=eps, experiment="single",
                                  output_dir=str(out / f"eps_{eps!r}"))
        _, u0, snaps, _, report = _execute_single(sub, with_tracker=False)
        _print_summary(sub, report)
        if write:
            _write_single_outputs(Path(sub.output_dir), sub, u0, snaps, None, report)
        finals.append(snaps.last_state.u)
        worst = max(worst, _exit_code(sub, report))

    grid = finals[0].grid
    distances = []
    pairs = []
    for hi, lo in zip(finals[:-1], finals[1:]):
        d = lp_norm(Field(grid, hi.values - lo.values), 2)
        distances.append(d)
        pairs.append((eps_levels[len(distances) - 1], eps_levels[len(distances)]))
    print("  eps sweep distances:")
    for (e_hi, e_lo), d in zip(pairs, distances):
        print(f"    D(eps={e_hi:g} vs {e_lo:g}) = {d:.6e}")
    if len(distances) >= 2 and distances[0] > 0:
        print(f"  contraction ratio = {distances[1] / distances[0]:.3f}")
    if write:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep_summary.csv", "w") as fh:
            fh.write("eps_high,eps_low,l2_distance,ratio_to_previous\n")
            prev = None
            for (e_hi, e_lo), d in zip(pairs, distances):
                ratio = "" if prev in (None, 0.0) else _fmt(d / prev)
                fh.write(f"{_fmt(e_hi)},{_fmt(e_lo)},{_fmt(d)},{ratio}\n")
                prev = d
        (out / "config_echo.cfg").write_text(format_config_echo(cfg))
        figures.save_sweep_figure(out / "figures", pairs, distances)
    return worst


def _run_convergence(cfg: RunConfigFile, write: bool) -> int:
    out = Path(cfg.output_dir)
    n_top = cfg.n_nodes
    if (n_top - 1) % 4 != 0:
        raise ValueError("convergence experiment requires n_nodes - 1 divisible by 4")
    n_list = [(n_top - 1) // 4 + 1, (n_top - 1) // 2 + 1, n_top]
    ref_nodes = 8 * (n_top - 1) + 1
    ocfg = OracleConfig(reference_n_nodes=ref_nodes)

    def ic_on(grid: Grid) -> Field:
        return _initial_field(cfg, grid)

    top_grid = Grid(cfg.half_width, n_top)
    scfg = _solver_config(cfg, top_grid)
    u_ref_top = reference_solve(ic_on(top_grid), scfg, ocfg, ic_fn=ic_on)

    errors = []
    for n in n_list:
        grid = Grid(cfg.half_width, n)
        sub = _solver_config(cfg, grid)
        snaps = _SnapshotCollector([])
        report = run(ic_on(grid), sub, sinks=(snaps,), config_echo=_echo_dict(cfg))
        if report.status is not Status.COMPLETED:
            print(f"  convergence run at n={n} ended with {report.status.value}")
            return EXIT_NUMERICAL
        stride = (n_top - 1) // (n - 1)
        ref_vals = u_ref_top.values[::stride]
        errors.append(lp_norm(Field(grid, snaps.last_state.u.values - ref_vals), 2))
    ratios = [errors[i + 1] / errors[i] for i in range(len(errors) - 1)]
    print("  convergence vs reference:")
    for n, e in zip(n_list, errors):
        print(f"    n={n}: l2_error={e:.6e}")
    print(f"  contraction per doubling: {', '.join(f'{r:.3f}' for r in ratios)}")
    if write:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "convergence.csv", "w") as fh:
            fh.write("n_nodes,l2_error,ratio_to_previous\n")
            prev = None
            for n, e in zip(n_list, errors):
                ratio = "" if prev in (None, 0.0) else _fmt(e / prev)
                fh.write(f"{n},{_fmt(e)},{ratio}\n")
                prev = e
        (out / "config_echo.cfg").write_text(format_config_echo(cfg))
        figures.save_convergence_figure(out / "figures", n_list, errors)
    return EXIT_OK


def _run_convcheck(cfg: RunConfigFile, write: bool) -> int:
    out = Path(cfg.output_dir)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    worst = 0.0
    for n in (65, 257, 1025):
        grid = Grid(4.0, n)
        spec = KernelSpec.for_grid(grid)
        wk = wd = 0.0
        for _ in range(100):
            u = Field(grid, rng.random(n))
            dk = conv_k_direct(u, spec).values
            dd = conv_dk_direct(u, spec).values
            ek = np.max(np.abs(conv_k(u, spec).values - dk)) / np.max(np.abs(dk))
            ed = np.max(np.abs(conv_dk(u, spec).values - dd)) / np.max(np.abs(dd))
            wk, wd = max(wk, ek), max(wd, ed)
        rows.append((n, wk, wd))
        worst = max(worst, wk, wd)
        print(f"  convcheck n={n}: worst rel err conv_k={wk:.3e} conv_dk={wd:.3e}")

    grid = Grid(4.0, 401)
    spec = KernelSpec.for_grid(grid)
    box = np.where(np.abs(grid.nodes) < 1.0, 1.0, 0.0)
    box[np.isclose(np.abs(grid.nodes), 1.0)] = 0.5  # midpoint value at the jump
    u_box = Field(grid, box)
    j0 = np.argmin(np.abs(grid.nodes))
    measured = conv_k(u_box, spec).values[j0]
    expected = quadrature_conv(indicator(-1.0, 1.0), 0.0, 0)
    closed = [("conv_k_indicator_at_0", measured, expected)]
    print(f"  closed form: conv_k(indicator)(0) = {measured:.6f}, expected {expected:.6f}")
    closed_bad = any(abs(m - e) > CLOSED_FORM_TOL for _, m, e in closed)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "convcheck.csv", "w") as fh:
            fh.write("n_nodes,worst_rel_err_conv_k,worst_rel_err_conv_dk\n")
            for n, wk, wd in rows:
                fh.write(f"{n},{_fmt(wk)},{_fmt(wd)}\n")
        with open(out / "convcheck_closed_forms.csv", "w") as fh:
            fh.write("quantity,measured,expected,abs_err\n")
            for name, m, e in closed:
                fh.write(f"{name},{_fmt(m)},{_fmt(e)},{_fmt(abs(m - e))}\n")
        (out / "config_echo.cfg").write_text(format_config_echo(cfg))
    return EXIT_BOUNDS if (worst > CONV_REL_TOL or closed_bad) else EXIT_OK


def run_experiment(cfg: RunConfigFile, write: bool = True) -> int:
    """Execute the configured experiment; returns the process exit code."""
    try:
        if cfg.experiment in ("single", "blowup"):
            return _run_single_experiment(cfg, write)
        if cfg.experiment == "eps_sweep":
            return _run_eps_sweep(cfg, write)
        if cfg.experiment == "convergence":
            return _run_convergence(cfg, write)
        if cfg.experiment == "convcheck":
            return _run_convcheck(cfg, write)
        raise ValueError(f"unknown experiment {cfg.experiment!r}")
    except OSError as exc:
        print(f"I/O failure: {exc}")
        return EXIT_IO


def check_experiment(cfg: RunConfigFile) -> int:
    """Bounds-only replay: rerun the experiment without writing any files."""
    return run_experiment(cfg, write=False)
