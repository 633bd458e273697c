"""File emitters: field CSVs, binary PGM heatmaps, analytics/monitor tables.

All text output goes through repr() of Python floats, so every value
round-trips exactly and reruns of the same config are byte-identical.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..bifurcation import BifurcationPoint
from ..solver import FieldState, Grid, MonitorSeries


def _fmt(x: float) -> str:
    return repr(float(x))


def write_field_csv(path: Path, grid: Grid, state: FieldState) -> None:
    """Cell-center fields in row-major order, full round-trip precision."""
    lines = []
    if grid.domain.ndim == 1:
        lines.append("x,u,v")
        for i, x in enumerate(grid.xs):
            lines.append(f"{_fmt(x)},{_fmt(state.u[i])},{_fmt(state.v[i])}")
    else:
        lines.append("x,y,u,v")
        xs, ys = grid.xs, grid.ys
        for j, y in enumerate(ys):
            for i, x in enumerate(xs):
                lines.append(f"{_fmt(x)},{_fmt(y)},{_fmt(state.u[j, i])},{_fmt(state.v[j, i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_pgm(path: Path, field: np.ndarray) -> None:
    """Binary PGM (P5, maxval 255), per-frame linear min/max normalization.

    The true range goes to a ``<name>.range.txt`` sidecar holding "min max".
    Rows are written north-up (largest y first) so the image matches the
    physical orientation.
    """
    path = Path(path)
    field = np.atleast_2d(np.asarray(field, dtype=float))
    lo = float(np.min(field))
    hi = float(np.max(field))
    if hi > lo:
        scaled = np.round((field - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(field)
    img = scaled.astype(np.uint8)[::-1, :]
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    path.with_suffix(path.suffix + ".range.txt").write_text(f"{_fmt(lo)} {_fmt(hi)}\n")


ANALYTICS_HEADER = ("m,n,lambda,chi_bar,Q,branch_type,chi_prime,"
                    "chi_double_prime,stability,minimizer,multiplicity")


def analytics_csv_rows(points: list[BifurcationPoint]) -> list[str]:
    rows = [ANALYTICS_HEADER]
    for bp in points:
        m = bp.mode.indices[0]
        n = bp.mode.indices[1] if len(bp.mode.indices) > 1 else 0
        chi2 = "" if bp.chi_double_prime is None else _fmt(bp.chi_double_prime)
        rows.append(",".join([
            str(m), str(n), _fmt(bp.mode.lam), _fmt(bp.chi_bar), _fmt(bp.q),
            bp.branch_type, _fmt(bp.chi_prime), chi2, bp.predicted_stability,
            "1" if bp.is_minimizer else "0", str(bp.mode.multiplicity),
        ]))
    return rows


def write_analytics_csv(path: Path, points: list[BifurcationPoint]) -> None:
    Path(path).write_text("\n".join(analytics_csv_rows(points)) + "\n")


def write_monitors_csv(path: Path, monitors: MonitorSeries,
                       modal: dict[tuple[int, ...], list[float]]) -> None:
    cols = ["t", "min_u", "max_u", "mass_u", "mass_v", "rate"]
    modal_keys = sorted(modal)
    cols += ["coef_" + "_".join(map(str, k)) for k in modal_keys]
    lines = [",".join(cols)]
    for i in range(len(monitors.times)):
        row = [monitors.times[i], monitors.min_u[i], monitors.max_u[i],
               monitors.mass_u[i], monitors.mass_v[i], monitors.rate[i]]
        row += [modal[k][i] for k in modal_keys]
        lines.append(",".join("inf" if math.isinf(v) else _fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


SWEEP_HEADER = "value,outcome,max_u,dominant_mode,steady_residual"


def write_sweep_csv(path: Path, rows: list[tuple]) -> None:
    lines = [SWEEP_HEADER]
    for value, outcome, max_u, dominant, residual in rows:
        lines.append(",".join([
            _fmt(value), outcome,
            "" if max_u is None else _fmt(max_u),
            dominant or "",
            "" if residual is None else _fmt(residual),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")
