"""Finite-difference IMEX time integrator for the chemotaxis system.

Cell-centered grids, zero-flux boundaries by ghost-cell reflection, the
chemotaxis flux and kinetics advanced explicitly in conservative flux form,
diffusion advanced implicitly by dimensionally split tridiagonal solves.
With mu = 0 total cell mass is conserved to round-off because the transport
fluxes telescope and the implicit diffusion matrices have zero column sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import get_lapack_funcs

from . import _kernels
from .eigenbasis import Domain, DomainError, Mode, project, sample_mode
from .model import ModelParams, homogeneous_state

# Safety fractions of the analytic stability limits.  The explicit
# chemotaxis divergence uses donor-cell (upwind) face densities: monotone
# and positivity-preserving under the advective CFL dt <= dx/a at face
# speed a = chi*phi_u*|grad v|.  Its compression part acts like a local
# reaction with rate r = chi*phi_u*lap(v) (explicit-Euler stable for
# dt <= 2/|r|), and the explicit kinetics need dt well inside the local
# relaxation time.
SAFETY_ADVECTION = 0.4
SAFETY_COMPRESSION = 0.4
SAFETY_KINETICS = 0.1

_ptsv = get_lapack_funcs("ptsv", (np.empty(0, dtype=np.float64),))


class StepSizeError(ValueError):
    """Requested dt violates the advective stability bound."""


class BlowUpError(FloatingPointError):
    """Fields became nonfinite during a step."""


class InsufficientWindowError(RuntimeError):
    """Growth measurement left the linear regime before enough samples."""


@dataclass(frozen=True)
class Grid:
    """Cell-centered uniform grid over an interval or rectangle."""

    domain: Domain
    nx: int
    ny: int | None = None

    def __post_init__(self):
        if self.domain.ndim == 1:
            if self.ny is not None:
                raise DomainError("interval grid takes no ny")
            if self.nx < 8:
                raise DomainError("need at least 8 cells per axis")
        else:
            if self.ny is None:
                raise DomainError("rectangle grid needs ny")
            if self.nx < 8 or self.ny < 8:
                raise DomainError("need at least 8 cells per axis")

    @property
    def dx(self) -> float:
        return self.domain.lx / self.nx

    @property
    def dy(self) -> float:
        return self.domain.ly / self.ny if self.ny else self.dx

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx,) if self.domain.ndim == 1 else (self.ny, self.nx)

    @property
    def xs(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def ys(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    @property
    def cell_volume(self) -> float:
        return self.dx if self.domain.ndim == 1 else self.dx * self.dy

    @property
    def min_spacing(self) -> float:
        return self.dx if self.domain.ndim == 1 else min(self.dx, self.dy)

    def meshes(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays shaped like a field."""
        if self.domain.ndim == 1:
            return (self.xs,)
        return tuple(np.meshgrid(self.xs, self.ys, indexing="xy"))


@dataclass(frozen=True, eq=False)
class FieldState:
    """Discrete (u, v) fields at one time level."""

    u: np.ndarray
    v: np.ndarray
    t: float = 0.0
    step_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))


def state_from_functions(grid: Grid, u_fn, v_fn, t: float = 0.0) -> FieldState:
    """Sample callables of the coordinates into a FieldState."""
    pts = grid.meshes()
    arg = pts[0] if grid.domain.ndim == 1 else pts
    u = np.asarray(u_fn(arg), dtype=float) + np.zeros(grid.shape)
    v = np.asarray(v_fn(arg), dtype=float) + np.zeros(grid.shape)
    return FieldState(u=u, v=v, t=t)


def homogeneous_field_state(p: ModelParams, grid: Grid) -> FieldState:
    ubar, vbar = homogeneous_state(p)
    return FieldState(u=np.full(grid.shape, ubar), v=np.full(grid.shape, vbar))


def _chemotaxis_div(u: np.ndarray, v: np.ndarray, p: ModelParams,
                    grid: Grid) -> tuple[np.ndarray, float, float]:
    """Divergence of the face-centered chemotaxis flux chi*phi*grad(v).

    Also returns the two quantities that bound the explicit step: the largest
    advective speed chi*phi_u*|grad v| over the faces and the largest local
    compression rate chi*phi_u*|lap v| over the cells.  Boundary faces carry
    zero flux.
    """
    chi = p.chi
    phi = p.phi
    if grid.domain.ndim == 1:
        dx = grid.dx
        gv = (v[1:] - v[:-1]) / dx
        uf = np.where(chi * gv > 0, u[:-1], u[1:])  # donor cell
        vf = 0.5 * (v[1:] + v[:-1])
        flux = chi * phi.value(uf, vf) * gv
        div = np.zeros_like(u)
        div[:-1] += flux / dx
        div[1:] -= flux / dx
        speed = float(np.max(np.abs(chi * phi.du(uf, vf) * gv))) if gv.size else 0.0
    elif _use_kernels(p):
        div = np.empty_like(u)
        bounds = np.empty(2)
        _kernels.chemotaxis_div_2d(u, v, chi, _kernels.PHI_CODES[phi.tag],
                                   grid.dx, grid.dy, div, bounds)
        return div, float(bounds[0]), float(bounds[1])
    else:
        dx, dy = grid.dx, grid.dy
        gvx = (v[:, 1:] - v[:, :-1]) / dx
        ufx = np.where(chi * gvx > 0, u[:, :-1], u[:, 1:])
        vfx = 0.5 * (v[:, 1:] + v[:, :-1])
        fx = chi * phi.value(ufx, vfx) * gvx
        gvy = (v[1:, :] - v[:-1, :]) / dy
        ufy = np.where(chi * gvy > 0, u[:-1, :], u[1:, :])
        vfy = 0.5 * (v[1:, :] + v[:-1, :])
        fy = chi * phi.value(ufy, vfy) * gvy
        div = np.zeros_like(u)
        div[:, :-1] += fx / dx
        div[:, 1:] -= fx / dx
        div[:-1, :] += fy / dy
        div[1:, :] -= fy / dy
        speed = max(float(np.max(np.abs(chi * phi.du(ufx, vfx) * gvx))),
                    float(np.max(np.abs(chi * phi.du(ufy, vfy) * gvy))))
    comp = float(np.max(np.abs(chi * p.phi.du(u, v) * _laplacian(v, grid))))
    return div, speed, comp


def _transport_bound(speed: float, comp: float, grid: Grid) -> float:
    bound = math.inf
    if speed > 0.0:
        bound = SAFETY_ADVECTION * grid.min_spacing / speed
    if comp > 0.0:
        bound = min(bound, SAFETY_COMPRESSION * 2.0 / comp)
    return bound


def advective_dt_bound(state: FieldState, p: ModelParams, grid: Grid) -> float:
    """Largest stable explicit step for the current chemotaxis transport
    (minimum of the advective CFL and compression limits, with safety
    factors)."""
    _, speed, comp = _chemotaxis_div(state.u, state.v, p, grid)
    return _transport_bound(speed, comp, grid)


def _solve_tridiag(a: float, n: int, rhs: np.ndarray, overwrite: bool) -> np.ndarray:
    """Solve (I - dt*D*Lap) x = rhs (Thomas algorithm via LAPACK ptsv).

    The matrix has diagonal 1+2a (1+a in the reflecting boundary rows) and
    off-diagonal -a; it is symmetric positive definite for a >= 0.  Systems
    run along the first axis of rhs.
    """
    d = np.full(n, 1.0 + 2.0 * a)
    d[0] = d[-1] = 1.0 + a
    e = np.full(n - 1, -a)
    _, _, x, info = _ptsv(d, e, rhs, True, True, overwrite)
    if info != 0:
        raise FloatingPointError(f"tridiagonal solve failed (info={info})")
    return x


def _diffuse(fld: np.ndarray, diffusivity: float, dt: float, grid: Grid) -> np.ndarray:
    """Implicit diffusion step; owns ``fld`` and may overwrite it."""
    if grid.domain.ndim == 1:
        return _solve_tridiag(diffusivity * dt / grid.dx ** 2, grid.nx, fld, True)
    # dimensional splitting: x-sweep then y-sweep
    if _kernels.HAVE_NUMBA:
        fld = np.ascontiguousarray(fld)
        _kernels.diffuse_2d(fld, diffusivity * dt / grid.dx ** 2,
                            diffusivity * dt / grid.dy ** 2)
        return fld
    half = _solve_tridiag(diffusivity * dt / grid.dx ** 2, grid.nx, fld.T, True)
    return _solve_tridiag(diffusivity * dt / grid.dy ** 2, grid.ny, half.T, True)


def _use_kernels(p: ModelParams) -> bool:
    # the compiled path hard-codes the built-in family formulas; duck-typed
    # custom families fall back to the numpy path
    return (_kernels.HAVE_NUMBA
            and getattr(p.phi, "tag", None) in _kernels.PHI_CODES
            and getattr(p.f, "tag", None) in ("linear", "affine_linear"))


def _advance(u: np.ndarray, v: np.ndarray, div: np.ndarray, p: ModelParams,
             grid: Grid, dt: float) -> tuple[np.ndarray, np.ndarray]:
    if grid.domain.ndim == 2 and _use_kernels(p):
        u_star = np.empty_like(u)
        v_star = np.empty_like(v)
        _kernels.explicit_stage_2d(u, v, div, p.mu, p.ubar, p.alpha,
                                   p.f.beta if p.f.tag == "affine_linear" else 1.0,
                                   dt, u_star, v_star)
    else:
        u_star = u + dt * (-div + p.mu * u * (p.ubar - u))
        v_star = v + dt * (-p.alpha * v + p.f.value(u))
    u_new = _diffuse(u_star, p.d1, dt, grid)
    v_new = _diffuse(v_star, p.d2, dt, grid)
    return u_new, v_new


def step(state: FieldState, p: ModelParams, grid: Grid, dt: float) -> FieldState:
    """One IMEX step.

    Explicit chemotaxis flux and kinetics, implicit diffusion.  dt must
    respect the advective bound; violating it raises StepSizeError, and a
    nonfinite result raises BlowUpError.
    """
    if not dt > 0:
        raise StepSizeError("dt must be positive")
    div, speed, comp = _chemotaxis_div(state.u, state.v, p, grid)
    bound = _transport_bound(speed, comp, grid)
    if dt > bound * (1.0 + 1e-9):
        raise StepSizeError(
            f"dt={dt:.3e} exceeds the transport stability bound {bound:.3e} "
            f"(advective CFL at face speed {speed:.3e}, compression rate {comp:.3e})")
    u_new, v_new = _advance(state.u, state.v, div, p, grid, dt)
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
        raise BlowUpError(f"nonfinite fields at t={state.t + dt:.6g}")
    return FieldState(u=u_new, v=v_new, t=state.t + dt,
                      step_count=state.step_count + 1)


def steady_residual(state: FieldState, p: ModelParams, grid: Grid) -> float:
    """Max-norm residual of the stationary equations under the same discrete
    operators the stepper uses."""
    div, _, _ = _chemotaxis_div(state.u, state.v, p, grid)
    r_u = p.d1 * _laplacian(state.u, grid) - div + p.mu * state.u * (p.ubar - state.u)
    r_v = p.d2 * _laplacian(state.v, grid) - p.alpha * state.v + p.f.value(state.u)
    return max(float(np.max(np.abs(r_u))), float(np.max(np.abs(r_v))))


def _laplacian(fld: np.ndarray, grid: Grid) -> np.ndarray:
    if grid.domain.ndim == 1:
        padded = np.pad(fld, 1, mode="edge")
        return (padded[:-2] - 2.0 * fld + padded[2:]) / grid.dx ** 2
    px = np.pad(fld, ((0, 0), (1, 1)), mode="edge")
    py = np.pad(fld, ((1, 1), (0, 0)), mode="edge")
    return ((px[:, :-2] - 2.0 * fld + px[:, 2:]) / grid.dx ** 2
            + (py[:-2, :] - 2.0 * fld + py[2:, :]) / grid.dy ** 2)


@dataclass(frozen=True)
class RunControls:
    """Termination and sampling controls for run()."""

    dt_max: float = 0.05
    t_max: float = 200.0
    tol_ss: float = 1e-8
    blow_up_cap: float | None = None  # defaults to 1e6 * ubar
    sample_every: int = 20            # steps between monitor samples
    max_steps: int | None = None

    def __post_init__(self):
        if not (self.dt_max > 0 and self.t_max > 0 and self.tol_ss > 0
                and self.sample_every > 0):
            raise ValueError("run controls must be positive")


@dataclass
class MonitorSeries:
    """Sampled run diagnostics (one entry per monitor sample)."""

    times: list[float] = field(default_factory=list)
    min_u: list[float] = field(default_factory=list)
    max_u: list[float] = field(default_factory=list)
    mass_u: list[float] = field(default_factory=list)
    mass_v: list[float] = field(default_factory=list)
    rate: list[float] = field(default_factory=list)


OUTCOME_CONVERGED = "converged"
OUTCOME_BLOW_UP = "blow_up"
OUTCOME_MAX_STEPS = "max_steps"


@dataclass
class RunReport:
    """Outcome of a simulation plus its monitor series.

    ``modal`` maps mode indices to the sampled projection coefficient of u;
    ``snapshots`` holds (time, state) pairs at the requested snapshot times.
    """

    outcome: str
    final: FieldState
    monitors: MonitorSeries
    modal: dict[tuple[int, ...], list[float]]
    snapshots: list[tuple[float, FieldState]]

    @property
    def t_final(self) -> float:
        return self.final.t


def run(initial: FieldState, p: ModelParams, grid: Grid, controls: RunControls,
        track_modes: tuple[Mode, ...] = (), snapshot_times: tuple[float, ...] = ()) -> RunReport:
    """Integrate until steady, blow-up, or the time horizon.

    dt is recomputed every step as min(dt_max, advective bound, kinetic
    bound).  The run counts as converged once the step rate
    max|u_new - u_old|/dt (both fields) stays below tol_ss on three
    consecutive monitor samples.
    """
    cap = controls.blow_up_cap if controls.blow_up_cap is not None else 1e6 * p.ubar
    monitors = MonitorSeries()
    modal: dict[tuple[int, ...], list[float]] = {md.indices: [] for md in track_modes}
    pending_snaps = sorted(t for t in snapshot_times if t > initial.t)
    snapshots: list[tuple[float, FieldState]] = []
    vol = grid.cell_volume
    state = initial
    consecutive_still = 0
    outcome = OUTCOME_MAX_STEPS

    def sample(rate: float) -> None:
        monitors.times.append(state.t)
        monitors.min_u.append(float(np.min(state.u)))
        monitors.max_u.append(float(np.max(state.u)))
        monitors.mass_u.append(float(np.sum(state.u)) * vol)
        monitors.mass_v.append(float(np.sum(state.v)) * vol)
        monitors.rate.append(rate)
        for md in track_modes:
            modal[md.indices].append(project(state.u, md, grid))

    sample(math.inf)
    while state.t < controls.t_max - 1e-14 * controls.t_max:
        if controls.max_steps is not None and state.step_count >= controls.max_steps:
            break
        div, speed, comp = _chemotaxis_div(state.u, state.v, p, grid)
        # kinetic relaxation cap follows the current amplitude so the explicit
        # logistic term stays stable even on tall spikes
        u_scale = max(p.ubar, float(np.max(state.u)))
        kin_dt = SAFETY_KINETICS / (p.mu * u_scale + p.alpha)
        dt = min(controls.dt_max, kin_dt, _transport_bound(speed, comp, grid))
        dt = min(dt, controls.t_max - state.t)
        if pending_snaps:
            dt = min(dt, pending_snaps[0] - state.t)
        if dt < 1e-14 * max(controls.t_max, 1.0):
            # advective bound collapsed: fluxes are runaway, call it blow-up
            outcome = OUTCOME_BLOW_UP
            break
        try:
            u_new, v_new = _advance(state.u, state.v, div, p, grid, dt)
            if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
                raise BlowUpError(f"nonfinite fields at t={state.t + dt:.6g}")
        except BlowUpError:
            outcome = OUTCOME_BLOW_UP
            break
        rate = max(float(np.max(np.abs(u_new - state.u))),
                   float(np.max(np.abs(v_new - state.v)))) / dt
        state = FieldState(u=u_new, v=v_new, t=state.t + dt,
                           step_count=state.step_count + 1)
        while pending_snaps and state.t >= pending_snaps[0] - 1e-12:
            snapshots.append((pending_snaps.pop(0), state))
        if float(np.max(state.u)) > cap:
            sample(rate)
            outcome = OUTCOME_BLOW_UP
            break
        if state.step_count % controls.sample_every == 0:
            sample(rate)
            consecutive_still = consecutive_still + 1 if rate < controls.tol_ss else 0
            if consecutive_still >= 3:
                outcome = OUTCOME_CONVERGED
                break
    if monitors.times[-1] != state.t:
        sample(monitors.rate[-1] if monitors.rate else math.inf)
    return RunReport(outcome=outcome, final=state, monitors=monitors,
                     modal=modal, snapshots=snapshots)


def measure_growth(p: ModelParams, grid: Grid, md: Mode, chi: float, eps: float,
                   window: float, dt: float | None = None, n_samples: int = 80,
                   burn_in: float = 0.25) -> float:
    """Empirical growth rate of one mode from a seeded linear-regime run.

    Seeds u with a sup-amplitude eps perturbation along the mode, samples the
    modal coefficient of u while the perturbation stays below 1e-2*ubar, and
    returns the least-squares slope of its log magnitude.  The first
    ``burn_in`` fraction of the window is excluded from the fit so the
    subdominant eigencomponent of the seed has died out.
    """
    from .bifurcation import linearize  # local import to avoid a cycle

    p = replace(p, chi=chi)
    ubar, vbar = homogeneous_state(p)
    if eps > 1e-3 * ubar * (1 + 1e-12):
        raise ValueError(f"seed amplitude eps={eps} exceeds 1e-3*ubar")
    if dt is None:
        rates = linearize(p, md).growth_rates
        scale = max(1.0, abs(rates[0]), abs(rates[1]))
        dt = min(0.005 / scale, SAFETY_KINETICS / (p.mu * p.ubar + p.alpha))
    shape = sample_mode(md, grid)
    state = FieldState(u=ubar + eps * shape / np.max(np.abs(shape)),
                       v=np.full(grid.shape, vbar))
    sample_dt = window / n_samples
    times = [state.t]
    coefs = [abs(project(state.u, md, grid))]
    next_sample = sample_dt
    amp_cap = 1e-2 * ubar
    noise_floor = 1e-12 * max(ubar, coefs[0])  # projection round-off scale
    while state.t < window - 1e-12:
        state = step(state, p, grid, min(dt, window - state.t))
        if state.t >= next_sample - 1e-12:
            coef = abs(project(state.u, md, grid))
            if float(np.max(np.abs(state.u - ubar))) > amp_cap or coef < noise_floor:
                break
            times.append(state.t)
            coefs.append(coef)
            next_sample += sample_dt
    if len(times) < 10:
        raise InsufficientWindowError(
            f"only {len(times)} samples inside the linear regime; "
            "reduce eps or the window")
    t = np.array(times)
    logc = np.log(np.maximum(np.array(coefs), 1e-300))
    keep = t >= burn_in * t[-1]
    if np.count_nonzero(keep) < 5:
        keep = slice(None)
    return float(np.polyfit(t[keep], logc[keep], 1)[0])
