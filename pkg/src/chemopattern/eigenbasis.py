"""Closed-form Neumann Laplacian eigenpairs on intervals and rectangles.

Eigenfunctions are normalized cosine products; the module also provides the
cubic/quartic moment integrals consumed by the branch analytics and the
midpoint-rule modal projection used by the simulation diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class DomainError(ValueError):
    """Point outside the domain, or grid/domain mismatch."""


@dataclass(frozen=True)
class Domain:
    """An interval (0, lx) or a rectangle (0, lx) x (0, ly)."""

    kind: str
    lx: float
    ly: float | None = None

    def __post_init__(self):
        if self.kind not in ("interval", "rectangle"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if not self.lx > 0:
            raise DomainError("lx must be positive")
        if self.kind == "rectangle":
            if self.ly is None or not self.ly > 0:
                raise DomainError("rectangle needs ly > 0")
        elif self.ly is not None:
            raise DomainError("interval takes no ly")

    @classmethod
    def interval(cls, length: float) -> "Domain":
        return cls("interval", length)

    @classmethod
    def rectangle(cls, lx: float, ly: float) -> "Domain":
        return cls("rectangle", lx, ly)

    @property
    def ndim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def lengths(self) -> tuple[float, ...]:
        return (self.lx,) if self.kind == "interval" else (self.lx, self.ly)

    @property
    def measure(self) -> float:
        return math.prod(self.lengths)


@dataclass(frozen=True)
class Mode:
    """One Neumann eigenpair: indices, eigenvalue, and L2 normalization.

    ``multiplicity`` counts how many index tuples share the eigenvalue within
    the enumeration that produced the mode (1 when constructed directly).
    """

    domain: Domain
    indices: tuple[int, ...]
    lam: float
    norm_const: float
    multiplicity: int = 1

    @property
    def label(self) -> str:
        return "_".join(str(i) for i in self.indices)


def mode(dom: Domain, *indices: int) -> Mode:
    """Build the mode with the given per-axis cosine indices."""
    if len(indices) != dom.ndim:
        raise DomainError(f"domain is {dom.ndim}D but got indices {indices}")
    if any(i < 0 for i in indices):
        raise DomainError("mode indices must be nonnegative")
    lam = sum((i * math.pi / L) ** 2 for i, L in zip(indices, dom.lengths))
    norm_sq = math.prod((L / 2.0 if i >= 1 else L) for i, L in zip(indices, dom.lengths))
    return Mode(dom, tuple(indices), lam, 1.0 / math.sqrt(norm_sq))


def enumerate_modes(dom: Domain, lambda_max: float) -> list[Mode]:
    """All nonzero modes with eigenvalue in (0, lambda_max], sorted by
    eigenvalue (ties broken lexicographically on indices), with the shared
    multiplicity attached to each member of a degenerate group."""
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    found = []
    if dom.kind == "interval":
        m = 1
        while (m * math.pi / dom.lx) ** 2 <= lambda_max:
            found.append(mode(dom, m))
            m += 1
    else:
        mmax = int(math.floor(math.sqrt(lambda_max) * dom.lx / math.pi))
        nmax = int(math.floor(math.sqrt(lambda_max) * dom.ly / math.pi))
        for m in range(mmax + 1):
            for n in range(nmax + 1):
                if m == 0 and n == 0:
                    continue
                cand = mode(dom, m, n)
                if cand.lam <= lambda_max:
                    found.append(cand)
    found.sort(key=lambda md: (md.lam, md.indices))
    # annotate eigenvalue multiplicity within the enumerated set
    out: list[Mode] = []
    i = 0
    while i < len(found):
        j = i
        while j < len(found) and math.isclose(found[j].lam, found[i].lam, rel_tol=1e-12):
            j += 1
        for k in range(i, j):
            out.append(replace(found[k], multiplicity=j - i))
        i = j
    return out


def _check_inside(dom: Domain, coords) -> None:
    for c, L in zip(coords, dom.lengths):
        arr = np.asarray(c)
        if np.any(arr < 0) or np.any(arr > L):
            raise DomainError(f"point outside closed domain [0, {L}]")


def eval_mode(md: Mode, point):
    """Normalized eigenfunction value at a point (or arrays of coordinates).

    For intervals ``point`` is x; for rectangles it is an (x, y) pair.
    Coordinates must lie in the closed domain.
    """
    coords = (point,) if md.domain.ndim == 1 else tuple(point)
    if len(coords) != md.domain.ndim:
        raise DomainError(f"expected {md.domain.ndim} coordinates, got {len(coords)}")
    _check_inside(md.domain, coords)
    out = md.norm_const
    for c, i, L in zip(coords, md.indices, md.domain.lengths):
        out = out * np.cos(i * math.pi * np.asarray(c, dtype=float) / L)
    return float(out) if np.ndim(out) == 0 else out


def eval_mode_grad(md: Mode, point):
    """Gradient of the normalized eigenfunction (tuple of components)."""
    coords = (point,) if md.domain.ndim == 1 else tuple(point)
    _check_inside(md.domain, coords)
    cos = [np.cos(i * math.pi * np.asarray(c, dtype=float) / L)
           for c, i, L in zip(coords, md.indices, md.domain.lengths)]
    sin = [np.sin(i * math.pi * np.asarray(c, dtype=float) / L)
           for c, i, L in zip(coords, md.indices, md.domain.lengths)]
    grads = []
    for axis, (i, L) in enumerate(zip(md.indices, md.domain.lengths)):
        g = md.norm_const * (-i * math.pi / L) * sin[axis]
        for other in range(md.domain.ndim):
            if other != axis:
                g = g * cos[other]
        grads.append(g)
    return tuple(grads)


@dataclass(frozen=True)
class ModeMoments:
    """The eigenfunction integrals the branch formulas consume."""

    i3: float      # integral of Phi^3
    i4: float      # integral of Phi^4
    i_grad: float  # integral of Phi*|grad Phi|^2  (= lam/2 * i3)


def moments(md: Mode) -> ModeMoments:
    """Closed-form moments for cosine-product modes.

    Per axis: int cos^3 = 0 and int cos^4 = 3L/8 for index >= 1 (both equal
    L for index 0), so i3 vanishes for every nonzero mode and i4 is a plain
    product.  The gradient moment follows the exact identity
    i_grad = (lam/2) * i3.
    """
    i3 = md.norm_const ** 3 * math.prod(
        (0.0 if i >= 1 else L) for i, L in zip(md.indices, md.domain.lengths))
    i4 = md.norm_const ** 4 * math.prod(
        (3.0 * L / 8.0 if i >= 1 else L) for i, L in zip(md.indices, md.domain.lengths))
    return ModeMoments(i3=i3, i4=i4, i_grad=0.5 * md.lam * i3)


def quadrature_points(dom: Domain, n_per_axis: int):
    """Midpoint-rule nodes (one array per axis, meshgrid for rectangles)
    and the cell weight."""
    axes = [(np.arange(n_per_axis) + 0.5) * (L / n_per_axis) for L in dom.lengths]
    weight = math.prod(L / n_per_axis for L in dom.lengths)
    if dom.ndim == 1:
        return (axes[0],), weight
    X, Y = np.meshgrid(axes[0], axes[1], indexing="xy")
    return (X, Y), weight


def quadrature_moments(md: Mode, n_per_axis: int | None = None) -> dict[str, float]:
    """Moment integrals by composite midpoint quadrature (the verification
    route for the closed forms).  Resolution defaults to 64 points per
    shortest half-wavelength of the mode."""
    if n_per_axis is None:
        n_per_axis = 64 * max(1, *md.indices)
    pts, w = quadrature_points(md.domain, n_per_axis)
    phi = eval_mode(md, pts[0] if md.domain.ndim == 1 else pts)
    grad = eval_mode_grad(md, pts[0] if md.domain.ndim == 1 else pts)
    grad_sq = sum(np.asarray(g) ** 2 for g in grad)
    phi = np.asarray(phi)
    return {
        "i2": float(np.sum(phi ** 2) * w),
        "i3": float(np.sum(phi ** 3) * w),
        "i4": float(np.sum(phi ** 4) * w),
        "i_grad": float(np.sum(phi * grad_sq) * w),
    }


def sample_mode(md: Mode, grid) -> np.ndarray:
    """Sample the normalized eigenfunction at the grid's cell centers."""
    if grid.domain != md.domain:
        raise DomainError("grid discretizes a different domain than the mode")
    if md.domain.ndim == 1:
        return np.asarray(eval_mode(md, grid.xs))
    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="xy")
    return np.asarray(eval_mode(md, (X, Y)))


def project(field: np.ndarray, md: Mode, grid) -> float:
    """Midpoint-rule inner product of a gridded field with the mode.

    Cell-centered cosine samples are mutually orthogonal under this product,
    so projecting a sampled mode onto itself returns 1 exactly.
    """
    field = np.asarray(field)
    if field.shape != grid.shape:
        raise DomainError(f"field shape {field.shape} does not match grid {grid.shape}")
    return float(np.sum(field * sample_mode(md, grid)) * grid.cell_volume)
