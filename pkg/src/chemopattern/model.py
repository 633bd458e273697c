"""Model parameters, sensitivity/kinetics families, and the homogeneous state.

The governing system couples a cell density u and a chemical concentration v:

    u_t = div(d1*grad(u) - chi*phi(u, v)*grad(v)) + mu*u*(ubar - u)
    v_t = d2*lap(v) - alpha*v + f(u)

with zero-flux boundaries.  phi and f are restricted to small closed families
with hand-coded derivatives so the branch analytics downstream stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ModelError(ValueError):
    """Invalid model parameters or degenerate model configuration."""


@dataclass(frozen=True)
class Sensitivity:
    """Chemotactic sensitivity phi(u, v) with exact partials.

    Tags: ``linear`` phi = u, ``volume_filling`` phi = u*(1 - u),
    ``constant`` phi = 1.  The volume-filling form is only positive for
    0 < u < 1; it is accepted as-is and positivity is the caller's concern.
    """

    tag: str

    _TAGS = ("linear", "volume_filling", "constant")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ModelError(f"unknown sensitivity family {self.tag!r}; expected one of {self._TAGS}")

    @classmethod
    def linear(cls) -> "Sensitivity":
        return cls("linear")

    @classmethod
    def volume_filling(cls) -> "Sensitivity":
        return cls("volume_filling")

    @classmethod
    def constant(cls) -> "Sensitivity":
        return cls("constant")

    def value(self, u, v):
        # u may be a numpy array (the solver evaluates phi at cell faces).
        if self.tag == "linear":
            return u
        if self.tag == "volume_filling":
            return u * (1.0 - u)
        return u * 0.0 + 1.0

    def du(self, u: float, v: float) -> float:
        if self.tag == "linear":
            return 1.0
        if self.tag == "volume_filling":
            return 1.0 - 2.0 * u
        return 0.0

    def dv(self, u: float, v: float) -> float:
        return 0.0

    def duu(self, u: float, v: float) -> float:
        return -2.0 if self.tag == "volume_filling" else 0.0

    def duv(self, u: float, v: float) -> float:
        return 0.0

    def dvv(self, u: float, v: float) -> float:
        return 0.0


@dataclass(frozen=True)
class Kinetics:
    """Chemical production rate f(u).

    Tags: ``linear`` f = u, ``affine_linear`` f = beta*u with beta > 0.
    Both families have f'' = 0, which the second-order branch analytics
    require (see validate_for_branch_analytics).
    """

    tag: str
    beta: float = 1.0

    _TAGS = ("linear", "affine_linear")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ModelError(f"unknown kinetics family {self.tag!r}; expected one of {self._TAGS}")
        if self.tag == "affine_linear" and not self.beta > 0:
            raise ModelError("affine_linear kinetics require beta > 0")

    @classmethod
    def linear(cls) -> "Kinetics":
        return cls("linear")

    @classmethod
    def affine_linear(cls, beta: float) -> "Kinetics":
        return cls("affine_linear", beta)

    def value(self, u):
        return u if self.tag == "linear" else self.beta * u

    def df(self, u: float) -> float:
        return 1.0 if self.tag == "linear" else self.beta

    def d2f(self, u: float) -> float:
        return 0.0


@dataclass(frozen=True)
class ModelParams:
    """All model constants plus the selected sensitivity/kinetics families.

    chi may be any real number (negative chi is chemorepulsion); the
    remaining rate constants must be strictly positive.
    """

    d1: float
    d2: float
    chi: float
    mu: float
    ubar: float
    alpha: float
    phi: Sensitivity = field(default_factory=Sensitivity.linear)
    f: Kinetics = field(default_factory=Kinetics.linear)

    def __post_init__(self):
        for name in ("d1", "d2", "ubar", "alpha"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ModelError(f"{name} must be positive, got {value}")
        # mu = 0 (no cellular growth) is allowed: it is the regime in which
        # the transport scheme conserves total cell mass exactly.
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise ModelError(f"mu must be nonnegative, got {self.mu}")
        if not math.isfinite(self.chi):
            raise ModelError(f"chi must be finite, got {self.chi}")


def homogeneous_state(p: ModelParams) -> tuple[float, float]:
    """Unique positive constant equilibrium (ubar, f(ubar)/alpha)."""
    return p.ubar, p.f.value(p.ubar) / p.alpha


def validate_for_branch_analytics(p: ModelParams) -> list[str]:
    """Check the assumptions the branch slope/curvature formulas rely on.

    Returns a list of violated assumptions (empty means ok).  The formulas
    drop the second-order Taylor term of f, so f''(ubar) must vanish, and
    all second partials of phi must be finite at the homogeneous state.
    """
    violations = []
    ubar, vbar = homogeneous_state(p)
    if p.f.d2f(ubar) != 0.0:
        violations.append("second-order kinetics term unmodeled: f''(ubar) != 0")
    partials = (
        p.phi.value(ubar, vbar),
        p.phi.du(ubar, vbar),
        p.phi.dv(ubar, vbar),
        p.phi.duu(ubar, vbar),
        p.phi.duv(ubar, vbar),
        p.phi.dvv(ubar, vbar),
    )
    if not all(math.isfinite(x) for x in partials):
        violations.append("sensitivity is not twice differentiable at the homogeneous state")
    return violations
