"""Problem instances and their text configuration format.

A scenario file is INI-like: ``[section]`` headers followed by ``key = value``
lines.  Every numeric value may be an expression such as ``sqrt(2)`` or
``pi/3``.  Sections:

``[outer]`` / ``[inner]``
    ``kind`` (circle | ellipse | generic), ``center = x, y`` and either
    ``radius``; ``a``, ``b``, ``angle`` (radians); or ``r`` (an expression in
    ``phi``) with optional ``samples``.  Omit ``[inner]`` for a one-medium table.
``[speeds]``
    ``c1``, ``c2``, ``allow_slow_inclusion``.
``[observation]``
    exactly one of ``x0 = x, y``, ``arc = s_lo, s_hi``,
    ``angles = deg_lo, deg_hi`` (native angle of the outer curve) or
    ``full = true``; plus ``horizon``.
``[caps]``
    ``depth_cap``, ``max_events``, ``max_iter``.
``[tolerances]``
    ``tol_geom``, ``tol_tangency``, ``tol_angle``, ``tol_arc``, ``tol_mono``,
    ``tol_orbit``, ``tol_witness``.
``[sampling]``
    ``obs_grid``, ``trap_grid``, ``gcc_grid`` (``NxM``), ``mono_samples``,
    ``glide_spacing``, ``seed``.
``[start]``
    Root phase point for ``trace``: ``boundary``, ``s``, ``theta`` (angle from
    the counter-clockwise tangent, in radians), ``medium``, ``time``.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError
from .geometry import BoundaryArc, BoundaryCurve, Ellipse, radial_from_expr

SECTIONS = ("outer", "inner", "speeds", "observation", "caps", "tolerances", "sampling", "start")


@dataclass(frozen=True)
class CurveSpec:
    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    radius: float | None = None
    a: float | None = None
    b: float | None = None
    angle: float = 0.0
    r: str | None = None
    samples: int = 4096

    def build(self) -> BoundaryCurve:
        if self.kind == "circle":
            return Ellipse(self.center, self.radius, self.radius, 0.0)
        if self.kind == "ellipse":
            return Ellipse(self.center, self.a, self.b, self.angle)
        if self.kind == "generic":
            return radial_from_expr(self.r, center=self.center, samples=self.samples)
        raise ConfigError(f"unknown curve kind {self.kind!r}")

    def lines(self) -> list[str]:
        out = [f"kind = {self.kind}", f"center = {self.center[0]!r}, {self.center[1]!r}"]
        if self.kind == "circle":
            out.append(f"radius = {self.radius!r}")
        elif self.kind == "ellipse":
            out += [f"a = {self.a!r}", f"b = {self.b!r}", f"angle = {self.angle!r}"]
        else:
            out += [f"r = {self.r}", f"samples = {self.samples}"]
        return out


@dataclass(frozen=True)
class Observation:
    kind: str = "full"  # x0 | arc | full
    x0: tuple[float, float] | None = None
    arc: tuple[float, float] | None = None


@dataclass(frozen=True)
class Tolerances:
    geom: float = 1e-10
    tangency: float = 1e-9
    angle: float = 1e-9
    arc: float = 1e-10
    mono: float = 1e-9
    orbit: float = 1e-10
    witness: float = 1e-6


@dataclass(frozen=True)
class StartSpec:
    boundary: str = "outer"
    s: float = 0.0
    theta: float = math.pi / 2
    medium: int = 1
    time: float = 0.0


@dataclass(frozen=True)
class Scenario:
    outer: CurveSpec
    inner: CurveSpec | None = None
    c1: float = 1.0
    c2: float = math.sqrt(2.0)
    allow_slow_inclusion: bool = False
    observation: Observation = field(default_factory=Observation)
    horizon: float = 20.0
    depth_cap: int = 8
    max_events: int = 100_000
    max_iter: int = 64
    tol: Tolerances = field(default_factory=Tolerances)
    obs_grid: tuple[int, int] = (128, 64)
    trap_grid: tuple[int, int] = (256, 256)
    gcc_grid: tuple[int, int] = (360, 180)
    mono_samples: int = 1000
    glide_spacing: float | None = None
    seed: int = 0
    start: StartSpec = field(default_factory=StartSpec)

    @cached_property
    def outer_curve(self) -> BoundaryCurve:
        c = self.outer.build()
        if self.observation.kind == "x0":
            c = c.anchored_at(self.observation.x0)
        return c

    @cached_property
    def inner_curve(self) -> BoundaryCurve | None:
        if self.inner is None:
            return None
        c = self.inner.build()
        if self.observation.kind == "x0":
            c = c.anchored_at(self.observation.x0)
        return c

    def curve(self, boundary: str) -> BoundaryCurve:
        return self.outer_curve if boundary == "outer" else self.inner_curve

    def speed(self, medium: int) -> float:
        return self.c1 if medium == 1 else self.c2

    @cached_property
    def gamma(self) -> BoundaryArc:
        """Observation region on the outer boundary."""
        from .regions import gamma_x0

        ob = self.observation
        if ob.kind == "x0":
            return gamma_x0(self.outer_curve, ob.x0)
        if ob.kind == "arc":
            return BoundaryArc("outer", ob.arc[0] % 1.0, ob.arc[1] % 1.0)
        return BoundaryArc.whole("outer")

    @property
    def spacing(self) -> float:
        if self.glide_spacing is not None:
            return self.glide_spacing
        return self.outer_curve.perimeter / 256.0

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "Scenario":
        """Check the standing invariants; raises ConfigError naming the failure."""
        for name, val in dataclasses.asdict(self.tol).items():
            if not val > 0:
                raise ConfigError(f"validation: tolerance {name} must be positive")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ConfigError("validation: speeds must be positive")
        if self.inner is not None and not self.c2 > self.c1 and not self.allow_slow_inclusion:
            raise ConfigError("validation: c2 must exceed c1 (set allow_slow_inclusion to override)")
        if self.horizon < 0 or self.depth_cap < 0 or self.max_events <= 0 or self.max_iter <= 0:
            raise ConfigError("validation: horizon and caps must be non-negative")
        try:
            outer = self.outer_curve
            inner = self.inner_curve
        except Exception as exc:  # curve construction failures are validation errors
            raise ConfigError(f"validation: {exc}") from exc
        if inner is not None:
            pts = inner.sample(512)
            if not np.all(outer.inside_batch(pts[:, 0], pts[:, 1]) < 0):
                raise ConfigError("validation: clearance, inner curve is not strictly inside the outer one")
            opts = outer.sample(2048)
            gap = np.min(np.hypot(pts[:, None, 0] - opts[None, :, 0], pts[:, None, 1] - opts[None, :, 1]))
            if not gap > self.tol.geom:
                raise ConfigError("validation: clearance between curves is not positive")
        ob = self.observation
        if ob.kind == "x0" and not outer._inside_value(*ob.x0) > self.tol.geom:
            raise ConfigError("validation: x0 must lie outside the outer curve")
        if ob.kind == "arc" and (ob.arc[1] - ob.arc[0]) % 1.0 == 0.0:
            raise ConfigError("validation: observation arc is degenerate")
        if self.start.boundary not in ("outer", "inner") or self.start.medium not in (1, 2):
            raise ConfigError("validation: start must name a boundary and a medium")
        if self.start.boundary == "outer" and self.start.medium != 1:
            raise ConfigError("validation: outer-boundary starts travel in medium 1")
        if self.start.boundary == "inner" and inner is None:
            raise ConfigError("validation: start on a missing inner curve")
        return self


# ---------------------------------------------------------------------------
# parsing


def evaluate(expr: str) -> float:
    """Evaluate a numeric expression (``sqrt(2)``, ``pi/3``, ``1e-9`` ...)."""
    import sympy as sp

    try:
        val = sp.sympify(expr.strip(), rational=False)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse {expr!r}") from exc
    if val.free_symbols:
        raise ValueError(f"{expr!r} is not a number")
    return float(val.evalf(30))


def _key_line(text: str, section: str, key: str) -> int | None:
    cur = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]", line)
        if m:
            cur = m.group(1).strip().lower()
        elif cur == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.I):
            return i
    return None


class _Reader:
    def __init__(self, text: str, cp: configparser.ConfigParser):
        self.text, self.cp = text, cp

    def fail(self, section, key, msg):
        raise ConfigError(f"[{section}] {key}: {msg}", _key_line(self.text, section, key))

    def has(self, section, key):
        return self.cp.has_section(section) and self.cp.has_option(section, key)

    def raw(self, section, key, default=None):
        if not self.has(section, key):
            return default
        return self.cp.get(section, key)

    def num(self, section, key, default=None):
        v = self.raw(section, key)
        if v is None:
            return default
        try:
            return evaluate(v)
        except ValueError as exc:
            self.fail(section, key, str(exc))

    def integer(self, section, key, default=None):
        v = self.num(section, key)
        if v is None:
            return default
        if v != int(v):
            self.fail(section, key, "expected an integer")
        return int(v)

    def pair(self, section, key):
        v = self.raw(section, key)
        if v is None:
            return None
        parts = [p for p in v.split(",")]
        if len(parts) != 2:
            self.fail(section, key, "expected two comma-separated values")
        try:
            return (evaluate(parts[0]), evaluate(parts[1]))
        except ValueError as exc:
            self.fail(section, key, str(exc))

    def grid(self, section, key, default):
        v = self.raw(section, key)
        if v is None:
            return default
        m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", v)
        if not m:
            self.fail(section, key, "expected NxM")
        return int(m.group(1)), int(m.group(2))

    def boolean(self, section, key, default=False):
        if not self.has(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            self.fail(section, key, "expected true/false")


def _curve_spec(rd: _Reader, section: str) -> CurveSpec:
    kind = (rd.raw(section, "kind") or "").strip().lower()
    center = rd.pair(section, "center") or (0.0, 0.0)
    if kind == "circle":
        radius = rd.num(section, "radius")
        if radius is None:
            rd.fail(section, "radius", "missing")
        return CurveSpec("circle", center, radius=radius)
    if kind == "ellipse":
        a, b = rd.num(section, "a"), rd.num(section, "b")
        if a is None or b is None:
            rd.fail(section, "a", "ellipse needs a and b")
        return CurveSpec("ellipse", center, a=a, b=b, angle=rd.num(section, "angle", 0.0))
    if kind == "generic":
        r = rd.raw(section, "r")
        if r is None:
            rd.fail(section, "r", "generic curve needs r(phi)")
        return CurveSpec("generic", center, r=r.strip(), samples=rd.integer(section, "samples", 4096))
    rd.fail(section, "kind", f"unknown curve kind {kind!r}")


def parse_scenario(text: str, validate: bool = True) -> Scenario:
    """Parse scenario text; raises ConfigError with a line number on failure."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc.message if hasattr(exc, 'message') else exc}",
                          getattr(exc, "lineno", None)) from exc
    for sec in cp.sections():
        if sec.lower() not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}]", _key_line(text, sec, "") or None)
    rd = _Reader(text, cp)
    if not cp.has_section("outer"):
        raise ConfigError("missing [outer] section")
    outer = _curve_spec(rd, "outer")
    inner = _curve_spec(rd, "inner") if cp.has_section("inner") else None

    forms = [k for k in ("x0", "arc", "angles", "full") if rd.has("observation", k)]
    if len(forms) > 1:
        rd.fail("observation", forms[1], "give only one of x0, arc, angles, full")
    if not forms or forms[0] == "full":
        obs = Observation("full")
    elif forms[0] == "x0":
        obs = Observation("x0", x0=rd.pair("observation", "x0"))
    elif forms[0] == "arc":
        obs = Observation("arc", arc=rd.pair("observation", "arc"))
    else:
        lo, hi = rd.pair("observation", "angles")
        curve = outer.build()
        obs = Observation("arc", arc=(curve.s_of_u(math.radians(lo)), curve.s_of_u(math.radians(hi))))

    d = Scenario(outer=outer)
    t = Tolerances()
    tol = Tolerances(**{f.name: rd.num("tolerances", f"tol_{f.name}", getattr(t, f.name))
                        for f in dataclasses.fields(Tolerances)})
    st = StartSpec()
    start = StartSpec(
        boundary=(rd.raw("start", "boundary") or st.boundary).strip().lower(),
        s=rd.num("start", "s", st.s),
        theta=rd.num("start", "theta", st.theta),
        medium=rd.integer("start", "medium", st.medium),
        time=rd.num("start", "time", st.time),
    )
    scn = Scenario(
        outer=outer,
        inner=inner,
        c1=rd.num("speeds", "c1", d.c1),
        c2=rd.num("speeds", "c2", d.c2),
        allow_slow_inclusion=rd.boolean("speeds", "allow_slow_inclusion", False),
        observation=obs,
        horizon=rd.num("observation", "horizon", d.horizon),
        depth_cap=rd.integer("caps", "depth_cap", d.depth_cap),
        max_events=rd.integer("caps", "max_events", d.max_events),
        max_iter=rd.integer("caps", "max_iter", d.max_iter),
        tol=tol,
        obs_grid=rd.grid("sampling", "obs_grid", d.obs_grid),
        trap_grid=rd.grid("sampling", "trap_grid", d.trap_grid),
        gcc_grid=rd.grid("sampling", "gcc_grid", d.gcc_grid),
        mono_samples=rd.integer("sampling", "mono_samples", d.mono_samples),
        glide_spacing=rd.num("sampling", "glide_spacing", None),
        seed=rd.integer("sampling", "seed", d.seed),
        start=start,
    )
    return scn.validate() if validate else scn


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def dump_scenario(scn: Scenario) -> str:
    """Render a scenario in the config format; ``parse_scenario`` inverts it."""
    out = ["[outer]", *scn.outer.lines(), ""]
    if scn.inner is not None:
        out += ["[inner]", *scn.inner.lines(), ""]
    out += ["[speeds]", f"c1 = {scn.c1!r}", f"c2 = {scn.c2!r}",
            f"allow_slow_inclusion = {str(scn.allow_slow_inclusion).lower()}", ""]
    ob = scn.observation
    out.append("[observation]")
    if ob.kind == "x0":
        out.append(f"x0 = {ob.x0[0]!r}, {ob.x0[1]!r}")
    elif ob.kind == "arc":
        out.append(f"arc = {ob.arc[0]!r}, {ob.arc[1]!r}")
    else:
        out.append("full = true")
    out += [f"horizon = {scn.horizon!r}", ""]
    out += ["[caps]", f"depth_cap = {scn.depth_cap}", f"max_events = {scn.max_events}",
            f"max_iter = {scn.max_iter}", ""]
    out.append("[tolerances]")
    out += [f"tol_{k} = {v!r}" for k, v in dataclasses.asdict(scn.tol).items()]
    out += ["", "[sampling]"]
    for name in ("obs_grid", "trap_grid", "gcc_grid"):
        g = getattr(scn, name)
        out.append(f"{name} = {g[0]}x{g[1]}")
    out.append(f"mono_samples = {scn.mono_samples}")
    if scn.glide_spacing is not None:
        out.append(f"glide_spacing = {scn.glide_spacing!r}")
    out += [f"seed = {scn.seed}", ""]
    st = scn.start
    out += ["[start]", f"boundary = {st.boundary}", f"s = {st.s!r}", f"theta = {st.theta!r}",
            f"medium = {st.medium}", f"time = {st.time!r}", ""]
    return "\n".join(out)


# ---------------------------------------------------------------------------
# reference scenarios used by the tests, demos and bundled config files


def concentric_scenario(**changes) -> Scenario:
    """Annulus 1 < |x| < 2 around the unit disc, c = (1, sqrt 2), x0 = (3, 0)."""
    scn = Scenario(outer=CurveSpec("circle", radius=2.0), inner=CurveSpec("circle", radius=1.0),
                   c1=1.0, c2=math.sqrt(2.0), observation=Observation("x0", x0=(3.0, 0.0)))
    return scn.replace(**changes).validate()


def trapped_scenario(**changes) -> Scenario:
    """Ellipse 4x2 around the unit disc, observed on its left half."""
    scn = Scenario(outer=CurveSpec("ellipse", a=4.0, b=2.0), inner=CurveSpec("circle", radius=1.0),
                   c1=1.0, c2=math.sqrt(2.0), observation=Observation("arc", arc=(0.25, 0.75)))
    return scn.replace(**changes).validate()


def offset_scenario(**changes) -> Scenario:
    """Circle R=3 with an off-centre inclusion r=0.6 at (1.2, 0), c = (1, 2), x0 = (6, 0)."""
    scn = Scenario(outer=CurveSpec("circle", radius=3.0),
                   inner=CurveSpec("circle", center=(1.2, 0.0), radius=0.6),
                   c1=1.0, c2=2.0, observation=Observation("x0", x0=(6.0, 0.0)))
    return scn.replace(**changes).validate()
