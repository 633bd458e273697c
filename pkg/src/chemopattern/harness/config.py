"""Scenario configuration: flat ``key = value`` text with dotted sections.

The format is deliberately small: every scenario a run can produce is fully
reproducible from its config text alone (noise requires an explicit seed).
Unknown keys are rejected so typos cannot silently change a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..eigenbasis import Domain, mode as make_mode
from ..model import Kinetics, ModelParams, Sensitivity, homogeneous_state
from ..solver import FieldState, Grid, RunControls

INIT_KINDS = ("fields", "branch_seed", "white_noise")
FIELD_KINDS = ("constant", "cosine", "gaussian")


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class InitField:
    """Initial profile of one field: a base constant plus one bump term.

    ``base = None`` means the homogeneous equilibrium value.  The cosine term
    is amp*cos(fx*x + px)*cos(fy*y + py); the gaussian term is
    amp*exp(-((x-cx)^2 + (y-cy)^2)/width).
    """

    kind: str = "constant"
    base: float | None = None
    amp: float = 0.0
    fx: float = 0.0
    px: float = 0.0
    fy: float = 0.0
    py: float = 0.0
    cx: float = 0.0
    cy: float = 0.0
    width: float = 1.0


@dataclass(frozen=True)
class InitSpec:
    """Initial data: independent field profiles, a bifurcation-branch seed,
    or seeded uniform noise about the homogeneous state."""

    kind: str = "fields"
    u: InitField = field(default_factory=InitField)
    v: InitField = field(default_factory=InitField)
    mode_indices: tuple[int, ...] = ()
    s: float = 0.0
    amplitude: float = 0.0
    seed: int | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one run."""

    name: str
    params: ModelParams
    domain: Domain
    nx: int
    ny: int | None
    init: InitSpec
    controls: RunControls = field(default_factory=RunControls)
    output_times: tuple[float, ...] = ()

    @property
    def grid(self) -> Grid:
        return Grid(self.domain, self.nx, self.ny)


class _KeyBag:
    """Parsed key/value pairs with line numbers, consumed key by key."""

    def __init__(self, text: str):
        self.items: dict[str, tuple[str, int]] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
            if key in self.items:
                raise ConfigError(f"duplicate key {key!r}", lineno)
            self.items[key] = (value, lineno)

    def take(self, key: str, default=None):
        if key in self.items:
            value, line = self.items.pop(key)
            return value, line
        return default, None

    def take_float(self, key: str, default: float | None = None) -> tuple[float | None, int | None]:
        raw, line = self.take(key)
        if raw is None:
            return default, None
        try:
            return float(raw), line
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}", line) from None

    def take_int(self, key: str, default: int | None = None) -> tuple[int | None, int | None]:
        raw, line = self.take(key)
        if raw is None:
            return default, None
        try:
            return int(raw), line
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}", line) from None

    def require(self, key: str) -> tuple[str, int]:
        raw, line = self.take(key)
        if raw is None:
            raise ConfigError(f"missing required key {key!r}")
        return raw, line

    def require_float(self, key: str) -> tuple[float, int]:
        raw, line = self.require(key)
        try:
            return float(raw), line
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}", line) from None

    def reject_leftovers(self) -> None:
        if self.items:
            key = min(self.items, key=lambda k: self.items[k][1])
            raise ConfigError(f"unknown key {key!r}", self.items[key][1])


def _parse_init_field(bag: _KeyBag, prefix: str, ndim: int) -> InitField:
    kind, kline = bag.take(f"{prefix}.kind")
    kind = kind or "constant"
    if kind not in FIELD_KINDS:
        raise ConfigError(f"{prefix}.kind must be one of {FIELD_KINDS}, got {kind!r}", kline)
    base, _ = bag.take_float(f"{prefix}.base")
    kwargs = {"kind": kind, "base": base}
    if kind == "cosine":
        for name in ("amp", "fx", "px", "fy", "py"):
            val, line = bag.take_float(f"{prefix}.{name}", 0.0)
            if ndim == 1 and name in ("fy", "py") and val != 0.0:
                raise ConfigError(f"{prefix}.{name} is meaningless on an interval", line)
            kwargs[name] = val
    elif kind == "gaussian":
        kwargs["amp"], _ = bag.take_float(f"{prefix}.amp", 0.0)
        kwargs["cx"], _ = bag.take_float(f"{prefix}.cx", 0.0)
        if ndim == 2:
            kwargs["cy"], _ = bag.take_float(f"{prefix}.cy", 0.0)
        width, wline = bag.take_float(f"{prefix}.width", 1.0)
        if not width > 0:
            raise ConfigError(f"{prefix}.width must be positive", wline)
        kwargs["width"] = width
    return InitField(**kwargs)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario config, filling documented defaults."""
    bag = _KeyBag(text)
    name, _ = bag.take("name")
    name = name or "scenario"

    consts: dict[str, float] = {}
    for short, positive in (("d1", True), ("d2", True), ("mu", False),
                            ("ubar", True), ("alpha", True)):
        val, line = bag.require_float(f"model.{short}")
        if positive and not val > 0:
            raise ConfigError(f"{short} must be positive", line)
        if not positive and not val >= 0:
            raise ConfigError(f"{short} must be nonnegative", line)
        consts[short] = val
    chi, _ = bag.require_float("model.chi")

    phi_tag, phi_line = bag.take("model.phi")
    phi_tag = phi_tag or "linear"
    if phi_tag not in Sensitivity._TAGS:
        raise ConfigError(f"unknown sensitivity family {phi_tag!r}", phi_line)
    f_tag, f_line = bag.take("model.f")
    f_tag = f_tag or "linear"
    if f_tag not in Kinetics._TAGS:
        raise ConfigError(f"unknown kinetics family {f_tag!r}", f_line)
    beta, beta_line = bag.take_float("model.beta")
    if f_tag == "affine_linear":
        if beta is None:
            raise ConfigError("model.beta is required for affine_linear kinetics")
        if not beta > 0:
            raise ConfigError("model.beta must be positive", beta_line)
    elif beta is not None:
        raise ConfigError("model.beta only applies to affine_linear kinetics", beta_line)

    params = ModelParams(chi=chi, phi=Sensitivity(phi_tag),
                         f=Kinetics(f_tag, beta if beta is not None else 1.0),
                         **consts)

    kind, kind_line = bag.take("domain.kind")
    kind = kind or "rectangle"
    if kind not in ("interval", "rectangle"):
        raise ConfigError(f"domain.kind must be interval or rectangle, got {kind!r}", kind_line)
    lx, lx_line = bag.require_float("domain.lx")
    if not lx > 0:
        raise ConfigError("domain.lx must be positive", lx_line)
    if kind == "rectangle":
        ly, ly_line = bag.take_float("domain.ly", lx)
        if not ly > 0:
            raise ConfigError("domain.ly must be positive", ly_line)
        domain = Domain.rectangle(lx, ly)
    else:
        domain = Domain.interval(lx)

    nx, nx_line = bag.take_int("grid.nx", 128)
    if nx < 8:
        raise ConfigError("grid.nx must be at least 8", nx_line)
    ny = None
    if kind == "rectangle":
        ny, ny_line = bag.take_int("grid.ny", nx)
        if ny < 8:
            raise ConfigError("grid.ny must be at least 8", ny_line)
    elif bag.take("grid.ny")[0] is not None:
        raise ConfigError("grid.ny is meaningless on an interval")

    init_kind, init_line = bag.take("init.kind")
    init_kind = init_kind or "fields"
    if init_kind not in INIT_KINDS:
        raise ConfigError(f"init.kind must be one of {INIT_KINDS}, got {init_kind!r}", init_line)
    if init_kind == "fields":
        init = InitSpec(kind="fields",
                        u=_parse_init_field(bag, "init.u", domain.ndim),
                        v=_parse_init_field(bag, "init.v", domain.ndim))
    elif init_kind == "branch_seed":
        raw, mline = bag.require("init.mode")
        try:
            indices = tuple(int(tok) for tok in raw.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"init.mode must be mode indices, got {raw!r}", mline) from None
        if len(indices) != domain.ndim:
            raise ConfigError(f"init.mode needs {domain.ndim} indices", mline)
        s, _ = bag.require_float("init.s")
        init = InitSpec(kind="branch_seed", mode_indices=indices, s=s)
    else:
        amp, aline = bag.require_float("init.amplitude")
        if not amp >= 0:
            raise ConfigError("init.amplitude must be nonnegative", aline)
        seed, _ = bag.take_int("init.seed")
        if seed is None:
            raise ConfigError("init.seed is mandatory for white_noise initial data")
        init = InitSpec(kind="white_noise", amplitude=amp, seed=seed)

    dt_max, dt_line = bag.take_float("run.dt_max", 0.05)
    t_max, tm_line = bag.take_float("run.t_max", 200.0)
    tol_ss, ts_line = bag.take_float("run.tol_ss", 1e-8)
    cap, cap_line = bag.take_float("run.blow_up_cap")
    sample_every, se_line = bag.take_int("run.sample_every", 20)
    for value, line, key in ((dt_max, dt_line, "run.dt_max"), (t_max, tm_line, "run.t_max"),
                             (tol_ss, ts_line, "run.tol_ss")):
        if not value > 0:
            raise ConfigError(f"{key} must be positive", line)
    if cap is not None and not cap > 0:
        raise ConfigError("run.blow_up_cap must be positive", cap_line)
    if not sample_every > 0:
        raise ConfigError("run.sample_every must be positive", se_line)
    controls = RunControls(dt_max=dt_max, t_max=t_max, tol_ss=tol_ss,
                           blow_up_cap=cap, sample_every=sample_every)

    times_raw, times_line = bag.take("output.times")
    output_times: tuple[float, ...] = ()
    if times_raw is not None:
        try:
            output_times = tuple(sorted(float(tok) for tok in times_raw.split(",") if tok.strip()))
        except ValueError:
            raise ConfigError(f"output.times must be comma-separated numbers, got {times_raw!r}",
                              times_line) from None

    bag.reject_leftovers()
    return ScenarioConfig(name=name, params=params, domain=domain, nx=nx, ny=ny,
                          init=init, controls=controls, output_times=output_times)


def _emit_init_field(lines: list[str], prefix: str, fld: InitField, ndim: int) -> None:
    lines.append(f"{prefix}.kind = {fld.kind}")
    if fld.base is not None:
        lines.append(f"{prefix}.base = {fld.base!r}")
    if fld.kind == "cosine":
        lines.append(f"{prefix}.amp = {fld.amp!r}")
        lines.append(f"{prefix}.fx = {fld.fx!r}")
        lines.append(f"{prefix}.px = {fld.px!r}")
        if ndim == 2:
            lines.append(f"{prefix}.fy = {fld.fy!r}")
            lines.append(f"{prefix}.py = {fld.py!r}")
    elif fld.kind == "gaussian":
        lines.append(f"{prefix}.amp = {fld.amp!r}")
        lines.append(f"{prefix}.cx = {fld.cx!r}")
        if ndim == 2:
            lines.append(f"{prefix}.cy = {fld.cy!r}")
        lines.append(f"{prefix}.width = {fld.width!r}")


def format_config(cfg: ScenarioConfig) -> str:
    """Canonical config text; parse_config(format_config(cfg)) == cfg."""
    p = cfg.params
    lines = [f"name = {cfg.name}"]
    for key in ("d1", "d2", "chi", "mu", "ubar", "alpha"):
        lines.append(f"model.{key} = {getattr(p, key)!r}")
    lines.append(f"model.phi = {p.phi.tag}")
    lines.append(f"model.f = {p.f.tag}")
    if p.f.tag == "affine_linear":
        lines.append(f"model.beta = {p.f.beta!r}")
    lines.append(f"domain.kind = {cfg.domain.kind}")
    lines.append(f"domain.lx = {cfg.domain.lx!r}")
    if cfg.domain.kind == "rectangle":
        lines.append(f"domain.ly = {cfg.domain.ly!r}")
    lines.append(f"grid.nx = {cfg.nx}")
    if cfg.ny is not None:
        lines.append(f"grid.ny = {cfg.ny}")
    lines.append(f"init.kind = {cfg.init.kind}")
    if cfg.init.kind == "fields":
        _emit_init_field(lines, "init.u", cfg.init.u, cfg.domain.ndim)
        _emit_init_field(lines, "init.v", cfg.init.v, cfg.domain.ndim)
    elif cfg.init.kind == "branch_seed":
        lines.append("init.mode = " + ",".join(str(i) for i in cfg.init.mode_indices))
        lines.append(f"init.s = {cfg.init.s!r}")
    else:
        lines.append(f"init.amplitude = {cfg.init.amplitude!r}")
        lines.append(f"init.seed = {cfg.init.seed}")
    c = cfg.controls
    lines.append(f"run.dt_max = {c.dt_max!r}")
    lines.append(f"run.t_max = {c.t_max!r}")
    lines.append(f"run.tol_ss = {c.tol_ss!r}")
    if c.blow_up_cap is not None:
        lines.append(f"run.blow_up_cap = {c.blow_up_cap!r}")
    lines.append(f"run.sample_every = {c.sample_every}")
    if cfg.output_times:
        lines.append("output.times = " + ",".join(repr(t) for t in cfg.output_times))
    return "\n".join(lines) + "\n"


def _eval_field(fld: InitField, default_base: float, grid: Grid) -> np.ndarray:
    pts = grid.meshes()
    x = pts[0]
    y = pts[1] if grid.domain.ndim == 2 else 0.0
    base = default_base if fld.base is None else fld.base
    out = np.full(grid.shape, base)
    if fld.kind == "cosine":
        out = out + fld.amp * np.cos(fld.fx * x + fld.px) * np.cos(fld.fy * y + fld.py)
    elif fld.kind == "gaussian":
        out = out + fld.amp * np.exp(-((x - fld.cx) ** 2 + (y - fld.cy) ** 2) / fld.width)
    return out


def initial_state(cfg: ScenarioConfig) -> FieldState:
    """Materialize the configured initial data on the scenario grid."""
    from ..bifurcation import branch_seed  # deferred: harness -> bifurcation only here

    grid = cfg.grid
    ubar, vbar = homogeneous_state(cfg.params)
    init = cfg.init
    if init.kind == "fields":
        return FieldState(u=_eval_field(init.u, ubar, grid),
                          v=_eval_field(init.v, vbar, grid))
    if init.kind == "branch_seed":
        md = make_mode(cfg.domain, *init.mode_indices)
        u_fn, v_fn = branch_seed(cfg.params, md, init.s)
        pts = grid.meshes()
        arg = pts[0] if grid.domain.ndim == 1 else pts
        return FieldState(u=np.asarray(u_fn(arg), dtype=float),
                          v=np.asarray(v_fn(arg), dtype=float))
    rng = np.random.default_rng(init.seed)
    u = ubar + init.amplitude * rng.uniform(-1.0, 1.0, grid.shape)
    v = vbar + init.amplitude * rng.uniform(-1.0, 1.0, grid.shape)
    return FieldState(u=u, v=v)


def with_axis_value(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """Return a copy of the config with one sweep axis replaced.

    Axes: chi, d1, d2, mu (model constants) and L (domain side; rectangles
    become L x L squares, grid resolution unchanged).
    """
    if axis in ("chi", "d1", "d2", "mu"):
        return replace(cfg, params=replace(cfg.params, **{axis: value}))
    if axis == "L":
        if cfg.domain.kind == "interval":
            return replace(cfg, domain=Domain.interval(value))
        return replace(cfg, domain=Domain.rectangle(value, value))
    raise ConfigError(f"unknown sweep axis {axis!r}; expected chi, d1, d2, mu, or L")
