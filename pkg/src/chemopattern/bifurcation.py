"""Dispersion relation, bifurcation ladder, and branch stability analytics.

Everything here is closed-form linear algebra around the homogeneous state:
the 2x2 per-mode stability matrix, the bifurcation values chi_bar_k where it
turns singular, the first/second derivatives of the branch parameterization
chi_k(s), and the wavemode-selection classifier (only the branch at the
chi_bar-minimizing mode can be stable).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .eigenbasis import Domain, Mode, ModeMoments, enumerate_modes, eval_mode, moments
from .model import ModelParams, homogeneous_state, validate_for_branch_analytics

#: below this magnitude chi'_k(0) counts as zero and the branch is a pitchfork
TOL_SLOPE = 1e-10

BRANCH_TRANSCRITICAL = "transcritical"
BRANCH_PITCHFORK = "pitchfork"

STABLE_S_POS = "stable_for_s_positive"
STABLE_S_NEG = "stable_for_s_negative"
BOTH_UNSTABLE = "both_unstable"
STABLE_SUPERCRITICAL = "stable_supercritical"
UNSTABLE_SUBCRITICAL = "unstable_subcritical"


class DegenerateModelError(ValueError):
    """f'(ubar) or phi(ubar, vbar) vanishes where a formula divides by it."""


class BranchAssumptionError(ValueError):
    """Model violates the assumptions of the branch analytics."""


class BranchTypeError(ValueError):
    """Operation requires a pitchfork branch (chi'_k(0) = 0)."""


class IllConditionedError(ValueError):
    """The 4x4 moment system is singular or numerically unreliable."""


def _state(p: ModelParams) -> tuple[float, float, float, float]:
    ubar, vbar = homogeneous_state(p)
    return ubar, vbar, p.f.df(ubar), p.phi.value(ubar, vbar)


@dataclass(frozen=True)
class Linearization:
    """Per-mode linearization about the homogeneous state."""

    mode: Mode
    matrix: tuple[tuple[float, float], tuple[float, float]]
    trace: float
    det: float
    growth_rates: tuple[complex, complex]  # ordered by real part, descending


def linearize(p: ModelParams, md: Mode) -> Linearization:
    """Stability matrix of the mode and its exact eigenvalues.

    The matrix is [[-d1*lam - mu*ubar, chi*phi*lam], [f'(ubar), -d2*lam - alpha]];
    its trace is negative for every mode, so instability is equivalent to a
    negative determinant.
    """
    ubar, _, fp, phib = _state(p)
    lam = md.lam
    h11 = -p.d1 * lam - p.mu * ubar
    h12 = p.chi * phib * lam
    h21 = fp
    h22 = -p.d2 * lam - p.alpha
    tr = h11 + h22
    det = h11 * h22 - h12 * h21
    disc = cmath.sqrt(tr * tr - 4.0 * det)
    roots = sorted(((tr + disc) / 2.0, (tr - disc) / 2.0),
                   key=lambda z: (z.real, z.imag), reverse=True)
    return Linearization(md, ((h11, h12), (h21, h22)), tr, det, (roots[0], roots[1]))


def chi_bar(p: ModelParams, md: Mode) -> float:
    """Bifurcation value at which the mode's linearization turns singular."""
    ubar, _, fp, phib = _state(p)
    if md.lam <= 0:
        raise ValueError("chi_bar needs a mode with positive eigenvalue")
    if fp * phib == 0.0:
        raise DegenerateModelError(
            "chi_bar undefined: f'(ubar)*phi(ubar, vbar) = 0")
    lam = md.lam
    return (p.d1 * lam + p.mu * ubar) * (p.d2 * lam + p.alpha) / (fp * phib * lam)


def q_ratio(p: ModelParams, md: Mode) -> float:
    """Amplitude ratio of the u-component to the v-component of the kernel
    eigenmode: (d2*lam + alpha)/f'(ubar)."""
    ubar, _, fp, _ = _state(p)
    if fp == 0.0:
        raise DegenerateModelError("q_ratio undefined: f'(ubar) = 0")
    return (p.d2 * md.lam + p.alpha) / fp


def enumeration_cutoff(p: ModelParams, dom: Domain) -> float:
    """Eigenvalue bound that provably brackets the chi_bar minimizer.

    chi_bar is convex in lam with continuous minimizer
    lam* = sqrt(alpha*mu*ubar/(d1*d2)); the discrete minimizer lies between
    the eigenvalues bracketing lam*, so 4*lam* plus the first eigenvalue is a
    generous safe cutoff.
    """
    lam_star = math.sqrt(p.alpha * p.mu * p.ubar / (p.d1 * p.d2))
    lam1 = min((math.pi / L) ** 2 for L in dom.lengths)
    return 4.0 * lam_star + lam1


@dataclass(frozen=True)
class ThresholdResult:
    """Instability threshold chi0 = min_k chi_bar_k and its attaining modes."""

    chi0: float
    minimizers: tuple[Mode, ...]  # all modes attaining chi0, lexicographic order

    @property
    def k0(self) -> Mode:
        return self.minimizers[0]


def chi_threshold(p: ModelParams, dom: Domain) -> ThresholdResult:
    """Minimum bifurcation value over all modes (= instability onset in chi).

    The homogeneous state is unstable exactly when chi exceeds the returned
    chi0.  Ties (degenerate eigenvalues or chi_bar collisions) are reported
    through the full minimizer tuple.
    """
    ubar, _, fp, phib = _state(p)
    if not (fp > 0 and phib > 0):
        raise DegenerateModelError(
            "chi_threshold needs f'(ubar) > 0 and phi(ubar, vbar) > 0")
    modes = enumerate_modes(dom, enumeration_cutoff(p, dom))
    values = [(chi_bar(p, md), md) for md in modes]
    chi0 = min(v for v, _ in values)
    mins = tuple(md for v, md in values
                 if math.isclose(v, chi0, rel_tol=1e-12, abs_tol=0.0))
    return ThresholdResult(chi0, mins)


def chi_prime(p: ModelParams, md: Mode, mom: ModeMoments) -> float:
    """First derivative chi'_k(0) of the branch parameterization.

    Proportional to the cubic moment of the eigenfunction, which vanishes for
    every cosine-product mode; the formula is kept general so non-product
    bases could reuse it.
    """
    violations = validate_for_branch_analytics(p)
    if violations:
        raise BranchAssumptionError("; ".join(violations))
    ubar, vbar, fp, phib = _state(p)
    if phib == 0.0 or fp == 0.0:
        raise DegenerateModelError("chi_prime undefined for degenerate model")
    lam = md.lam
    q = q_ratio(p, md)
    cb = chi_bar(p, md)
    slope_u = p.phi.du(ubar, vbar) * q + p.phi.dv(ubar, vbar)
    return (p.mu * q * q - 0.5 * lam * cb * slope_u) * mom.i3 / (lam * phib)


@dataclass(frozen=True)
class MomentSolution:
    """The four second-order correction moments and the system conditioning.

    m1, m2 pair the corrections psi1, psi2 against Phi^2; g1, g2 pair them
    against |grad Phi|^2.  The corrections themselves are never materialized.
    """

    m1: float
    g1: float
    m2: float
    g2: float
    condition: float


def _moment_matrix(p: ModelParams, md: Mode) -> np.ndarray:
    ubar, _, fp, phib = _state(p)
    lam = md.lam
    cb = chi_bar(p, md)
    mu_ubar = p.mu * ubar
    return np.array([
        [-2 * p.d1 * lam - mu_ubar, 2 * p.d1, 2 * cb * lam * phib, -2 * cb * phib],
        [2 * p.d1 * lam ** 2, -2 * p.d1 * lam - mu_ubar, -2 * cb * lam ** 2 * phib, 2 * cb * lam * phib],
        [fp, 0.0, -2 * p.d2 * lam - p.alpha, 2 * p.d2],
        [0.0, fp, 2 * p.d2 * lam ** 2, -2 * p.d2 * lam - p.alpha],
    ])


def solve_moment_system(p: ModelParams, md: Mode, mom: ModeMoments) -> MomentSolution:
    """Solve the 4x4 linear system determining the four correction moments.

    Only valid on pitchfork branches (chi'_k(0) = 0).  Raises
    IllConditionedError when the matrix is singular or its condition number
    exceeds 1e12, and verifies the solve to 1e-10 relative residual.
    """
    slope = chi_prime(p, md, mom)
    if abs(slope) > TOL_SLOPE:
        raise BranchTypeError(
            f"moment system requires chi'(0) = 0, got {slope:.3e} for mode {md.indices}")
    ubar, vbar, fp, phib = _state(p)
    lam = md.lam
    q = q_ratio(p, md)
    cb = chi_bar(p, md)
    slope_u = p.phi.du(ubar, vbar) * q + p.phi.dv(ubar, vbar)
    A = _moment_matrix(p, md)
    rhs = mom.i4 * np.array([
        p.mu * q * q - (2.0 / 3.0) * cb * slope_u * lam,
        (2.0 / 3.0) * lam ** 2 * cb * slope_u + (1.0 / 3.0) * lam * p.mu * q * q,
        0.0,
        0.0,
    ])
    cond = float(np.linalg.cond(A))
    if not math.isfinite(cond) or cond > 1e12:
        raise IllConditionedError(
            f"moment system for mode {md.indices} is ill-conditioned (cond={cond:.3e})")
    x = np.linalg.solve(A, rhs)
    scale = max(float(np.linalg.norm(rhs)),
                float(np.linalg.norm(A, ord=np.inf) * np.linalg.norm(x)))
    if scale > 0:
        rel = float(np.linalg.norm(A @ x - rhs)) / scale
        if rel > 1e-10:
            raise IllConditionedError(
                f"moment system residual {rel:.3e} exceeds 1e-10 for mode {md.indices}")
    return MomentSolution(m1=float(x[0]), g1=float(x[1]),
                          m2=float(x[2]), g2=float(x[3]), condition=cond)


def chi_double_prime(p: ModelParams, md: Mode, mom: ModeMoments,
                     ms: MomentSolution) -> float:
    """Second derivative chi''_k(0) of a pitchfork branch.

    Assembles the curvature from the four correction moments:

        (1/2)*phi*lam*chi'' = 2*mu*Q*m1
            + chi_bar*( phi_u*Q*g2 - phi_u*g1
                        - (lam/6)*(phi_uu*Q^2 + phi_vv + 2*phi_uv*Q)*i4
                        - lam*(phi_u*Q + phi_v)*m2 )

    A positive value means the branch opens toward larger chi (supercritical).
    """
    slope = chi_prime(p, md, mom)
    if abs(slope) > TOL_SLOPE:
        raise BranchTypeError(
            f"chi'' only defined on pitchfork branches; chi'(0) = {slope:.3e}")
    ubar, vbar, fp, phib = _state(p)
    lam = md.lam
    q = q_ratio(p, md)
    cb = chi_bar(p, md)
    phi_u = p.phi.du(ubar, vbar)
    phi_v = p.phi.dv(ubar, vbar)
    curv = (p.phi.duu(ubar, vbar) * q * q + p.phi.dvv(ubar, vbar)
            + 2.0 * p.phi.duv(ubar, vbar) * q)
    bracket = (phi_u * q * ms.g2 - phi_u * ms.g1
               - (lam / 6.0) * curv * mom.i4
               - lam * (phi_u * q + phi_v) * ms.m2)
    return 2.0 * (2.0 * p.mu * q * ms.m1 + cb * bracket) / (phib * lam)


def eigenvalue_drift(p: ModelParams, md: Mode) -> float:
    """d/dchi of the critical eigenvalue at chi = chi_bar_k.

    Closed form lam*f'(ubar)*phi(ubar, vbar) / ((d1+d2)*lam + mu*ubar + alpha);
    strictly positive when f'(ubar) > 0, which is the transversality that
    makes each crossing an honest exchange of stability.
    """
    ubar, _, fp, phib = _state(p)
    lam = md.lam
    return lam * fp * phib / ((p.d1 + p.d2) * lam + p.mu * ubar + p.alpha)


@dataclass(frozen=True)
class BifurcationPoint:
    """Per-mode bifurcation record with the predicted local branch stability."""

    mode: Mode
    chi_bar: float
    q: float
    chi_prime: float
    chi_double_prime: float | None  # only computed on pitchfork branches
    branch_type: str
    predicted_stability: str
    is_minimizer: bool
    degenerate_warning: bool


def classify_branch(p: ModelParams, dom: Domain, md: Mode,
                    threshold: ThresholdResult | None = None) -> BifurcationPoint:
    """Classify the local branch at one mode.

    Branches at non-minimizing modes are unstable on both sides.  At the
    minimizer the sign of chi'(0) (or of chi''(0) on pitchforks) decides the
    stable side: the branch is stable where it bends into chi > chi_bar.
    Degenerate eigenvalues violate the simple-eigenvalue hypothesis; the
    record is still produced but flagged.
    """
    if threshold is None:
        threshold = chi_threshold(p, dom)
    cb = chi_bar(p, md)
    q = q_ratio(p, md)
    mom = moments(md)
    slope = chi_prime(p, md, mom)
    is_min = any(md.indices == m.indices for m in threshold.minimizers)
    multiplicity = sum(
        1 for other in enumerate_modes(dom, md.lam * (1 + 1e-9))
        if math.isclose(other.lam, md.lam, rel_tol=1e-12))
    curvature: float | None = None
    if abs(slope) <= TOL_SLOPE:
        branch_type = BRANCH_PITCHFORK
        curvature = chi_double_prime(p, md, mom, solve_moment_system(p, md, mom))
        if not is_min:
            stability = BOTH_UNSTABLE
        elif curvature > 0:
            stability = STABLE_SUPERCRITICAL
        else:
            stability = UNSTABLE_SUBCRITICAL
    else:
        branch_type = BRANCH_TRANSCRITICAL
        if not is_min:
            stability = BOTH_UNSTABLE
        else:
            stability = STABLE_S_POS if slope > 0 else STABLE_S_NEG
    return BifurcationPoint(
        mode=replace(md, multiplicity=multiplicity),
        chi_bar=cb,
        q=q,
        chi_prime=slope,
        chi_double_prime=curvature,
        branch_type=branch_type,
        predicted_stability=stability,
        is_minimizer=is_min,
        degenerate_warning=multiplicity > 1,
    )


def bifurcation_ladder(p: ModelParams, dom: Domain,
                       lambda_max: float | None = None) -> list[BifurcationPoint]:
    """Classify every mode up to the enumeration cutoff, sorted by chi_bar."""
    if lambda_max is None:
        lambda_max = enumeration_cutoff(p, dom)
    threshold = chi_threshold(p, dom)
    points = [classify_branch(p, dom, md, threshold)
              for md in enumerate_modes(dom, lambda_max)]
    points.sort(key=lambda bp: (bp.chi_bar, bp.mode.indices))
    return points


def chi_collisions(p: ModelParams, dom: Domain,
                   lambda_max: float | None = None) -> list[tuple[Mode, Mode]]:
    """Pairs of distinct-eigenvalue modes whose chi_bar values collide.

    chi_bar(lam_i) = chi_bar(lam_j) exactly when d1*d2*lam_i*lam_j =
    alpha*mu*ubar; such collisions break the simple-crossing hypothesis and
    are surfaced as warnings rather than errors.
    """
    if lambda_max is None:
        lambda_max = enumeration_cutoff(p, dom)
    modes = enumerate_modes(dom, lambda_max)
    target = p.alpha * p.mu * p.ubar
    out = []
    for i, mi in enumerate(modes):
        for mj in modes[i + 1:]:
            if math.isclose(mi.lam, mj.lam, rel_tol=1e-12):
                continue
            if math.isclose(p.d1 * p.d2 * mi.lam * mj.lam, target,
                            rel_tol=1e-9, abs_tol=0.0):
                out.append((mi, mj))
    return out


def branch_seed(p: ModelParams, md: Mode, s: float):
    """First-order branch expansion as a pair of field closures.

    Returns (u_fn, v_fn) evaluating ubar + s*Q_k*Phi_k and vbar + s*Phi_k.
    Meaningful only for small amplitudes; keep |s| <= 0.1*ubar.
    """
    ubar, vbar = homogeneous_state(p)
    q = q_ratio(p, md)

    def u_fn(point):
        return ubar + s * q * eval_mode(md, point)

    def v_fn(point):
        return vbar + s * eval_mode(md, point)

    return u_fn, v_fn
