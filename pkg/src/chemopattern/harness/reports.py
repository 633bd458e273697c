"""Command-level operations: analytics reports, scenario runs, sweeps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..bifurcation import (BifurcationPoint, Mode, bifurcation_ladder,
                           chi_collisions, chi_threshold, enumeration_cutoff)
from ..eigenbasis import enumerate_modes, project
from ..model import homogeneous_state
from ..solver import Grid, RunReport, run, steady_residual
from .config import ScenarioConfig, initial_state, with_axis_value
from .outputs import (write_analytics_csv, write_field_csv, write_monitors_csv,
                      write_pgm, write_sweep_csv)


@dataclass
class AnalyticsReport:
    """Per-mode bifurcation ladder for one scenario."""

    config: ScenarioConfig
    chi0: float
    minimizers: tuple[Mode, ...]
    points: list[BifurcationPoint]          # sorted by chi_bar ascending
    collisions: list[tuple[Mode, Mode]]     # chi_bar collisions across modes

    def render(self) -> str:
        p = self.config.params
        ubar, vbar = homogeneous_state(p)
        head = [
            f"scenario {self.config.name}: d1={p.d1:g} d2={p.d2:g} chi={p.chi:g} "
            f"mu={p.mu:g} ubar={p.ubar:g} alpha={p.alpha:g} phi={p.phi.tag} f={p.f.tag}",
            f"homogeneous state ({ubar:g}, {vbar:g}); "
            f"chi0 = {self.chi0:.12g} at mode " +
            ", ".join(str(m.indices) for m in self.minimizers) +
            (f"; configured chi = {p.chi:g} is "
             + ("ABOVE" if p.chi > self.chi0 else "below") + " threshold"),
        ]
        cols = f"{'mode':>8} {'lambda':>12} {'chi_bar':>14} {'Q':>12} " \
               f"{'type':>14} {'chi2':>14} {'stability':>22} {'min':>4} {'mult':>4}"
        rows = [cols]
        for bp in self.points:
            chi2 = "" if bp.chi_double_prime is None else f"{bp.chi_double_prime:.6g}"
            rows.append(
                f"{str(bp.mode.indices):>8} {bp.mode.lam:>12.6g} {bp.chi_bar:>14.8g} "
                f"{bp.q:>12.6g} {bp.branch_type:>14} {chi2:>14} "
                f"{bp.predicted_stability:>22} {'*' if bp.is_minimizer else '':>4} "
                f"{bp.mode.multiplicity:>4}")
        tail = []
        for mi, mj in self.collisions:
            tail.append(f"warning: chi_bar collision between modes {mi.indices} "
                        f"and {mj.indices} (d1*d2*lam_i*lam_j = alpha*mu*ubar)")
        return "\n".join(head + rows + tail)


def analyze_config(cfg: ScenarioConfig, lambda_max: float | None = None) -> AnalyticsReport:
    """Bifurcation ladder up to the enumeration cutoff (or lambda_max)."""
    p, dom = cfg.params, cfg.domain
    threshold = chi_threshold(p, dom)
    points = bifurcation_ladder(p, dom, lambda_max)
    return AnalyticsReport(config=cfg, chi0=threshold.chi0,
                           minimizers=threshold.minimizers, points=points,
                           collisions=chi_collisions(p, dom, lambda_max))


def _dominant_mode(state, p, grid: Grid, lambda_max: float | None = None) -> str:
    """Indices of the mode carrying the largest share of the final u field."""
    dom = grid.domain
    cutoff = lambda_max if lambda_max is not None else enumeration_cutoff(p, dom)
    best, best_coef = None, 0.0
    for md in enumerate_modes(dom, cutoff):
        coef = abs(project(state.u, md, grid))
        if coef > best_coef:
            best, best_coef = md, coef
    return "_".join(map(str, best.indices)) if best is not None else ""


def _time_tag(t: float) -> str:
    return f"{t:g}"


def simulate_config(cfg: ScenarioConfig, outdir: Path,
                    track_modes: tuple[Mode, ...] = ()) -> RunReport:
    """Run one scenario and emit field CSVs, heatmaps, and monitors."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid
    report = run(initial_state(cfg), cfg.params, grid, cfg.controls,
                 track_modes=track_modes, snapshot_times=cfg.output_times)
    frames = list(report.snapshots) + [(report.final.t, report.final)]
    for t, state in frames:
        tag = _time_tag(t)
        write_field_csv(outdir / f"{cfg.name}_fields_t{tag}.csv", grid, state)
        for fname in ("u", "v"):
            write_pgm(outdir / f"{cfg.name}_{fname}_t{tag}.pgm", getattr(state, fname))
    write_monitors_csv(outdir / f"{cfg.name}_monitors.csv", report.monitors, report.modal)
    return report


def summarize_run(cfg: ScenarioConfig, report: RunReport) -> str:
    grid = cfg.grid
    res = steady_residual(report.final, cfg.params, grid)
    lines = [
        f"scenario {cfg.name}: outcome={report.outcome} at t={report.final.t:.6g} "
        f"after {report.final.step_count} steps",
        f"  u range [{float(np.min(report.final.u)):.6g}, {float(np.max(report.final.u)):.6g}]"
        f"  mass_u={report.monitors.mass_u[-1]:.9g}",
        f"  steady residual {res:.3e}"
        f"  dominant mode {_dominant_mode(report.final, cfg.params, grid)}",
    ]
    return "\n".join(lines)


def _sweep_one(cfg: ScenarioConfig, axis: str, value: float):
    try:
        sub = with_axis_value(cfg, axis, value)
        grid = sub.grid
        report = run(initial_state(sub), sub.params, grid, sub.controls)
        return (value, report.outcome, float(np.max(report.final.u)),
                _dominant_mode(report.final, sub.params, grid),
                steady_residual(report.final, sub.params, grid))
    except Exception as exc:  # per-run failures become rows, not crashes
        return (value, f"error:{type(exc).__name__}", None, None, None)


def sweep_config(cfg: ScenarioConfig, axis: str, values: list[float],
                 outdir: Path | None = None, workers: int | None = None) -> list[tuple]:
    """One run per value (in parallel), aggregated in input order."""
    if not values:
        rows: list[tuple] = []
    else:
        workers = workers or min(4, len(values))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda v: _sweep_one(cfg, axis, v), values))
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(outdir / f"{cfg.name}_sweep_{axis}.csv", rows)
    return rows
