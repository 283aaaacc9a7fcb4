"""Particle kinematics of the two exact families: world lines, Jacobians, geometry, RK4 oracle."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels, linalg
from .expr import (
    ZERO,
    Binding,
    Expr,
    Lambda,
    add,
    as_expr,
    differentiate,
    div,
    evaluate,
    fn,
    mul,
    neg,
    power,
    random_rational,
    sub,
    substitute,
    sym,
)
from .expr.compile import compile_exprs
from .expr.core import opaque_atoms
from .gas import GasFields, as_function, build_blowup_family, build_isochoric_family, curl, f_of

FAMILIES = ("isochoric", "blowup")
EXCLUSION_RADIUS = 0.05

t = sym("t")


def family_name(family) -> str:
    aliases = {1: "isochoric", "1": "isochoric", 2: "blowup", "2": "blowup", "isochoric": "isochoric", "blowup": "blowup"}
    try:
        return aliases[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None


def label_names(family) -> tuple:
    return ("x0", "y0", "z0") if family_name(family) == "isochoric" else ("u0", "y0", "z0")


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of a family; ``None`` keeps a parameter symbolic / a function abstract."""

    a: object = None
    b: object = None
    gamma: object = None
    rho0: object = None
    phi: object = None
    f: object = None

    def exprs(self):
        out = []
        for n in ("a", "b", "gamma", "rho0"):
            v = getattr(self, n)
            if isinstance(v, float):
                v = Fraction(v).limit_denominator(10**12)
            out.append(as_expr(n if v is None else v))
        return out

    @property
    def phi_lambda(self) -> Optional[Lambda]:
        return as_function(self.phi, 2)

    @property
    def f_lambda(self) -> Optional[Lambda]:
        return as_function(self.f, 1)

    def functions(self) -> dict:
        out = {}
        if self.phi is not None:
            out["Phi"] = self.phi_lambda
        if self.f is not None:
            out["f"] = self.f_lambda
        return out

    def fields(self, family) -> GasFields:
        a, b, gamma, rho0 = self.exprs()
        if family_name(family) == "isochoric":
            g = build_isochoric_family(a, b, gamma, rho0, self.phi)
        else:
            g = build_blowup_family(a, b, gamma, rho0, self.phi)
        return g.bind(f=self.f) if self.f is not None else g


FIG1 = FamilyParams(Fraction(4, 5), Fraction(3, 5), 1, 1, "arg1 + arg2")
FIG3 = FamilyParams(Fraction(4, 5), Fraction(3, 5), 1, 1, "-arg1^2 - arg2^2")


def Phi(p: FamilyParams, z0, y0) -> Expr:
    """Phi(z0, y0): concrete if defined, else the abstract application."""
    app = fn("Phi", as_expr(z0), as_expr(y0))
    lam = p.phi_lambda
    return substitute(app, {"Phi": lam}) if lam is not None else app


def _label(family, label):
    if label is None:
        label = label_names(family)
    if len(label) != 3:
        raise ValueError("a label has three components")
    return tuple(as_expr(v) if not isinstance(v, float) else as_expr(Fraction(v).limit_denominator(10**12)) for v in label)


@dataclass(frozen=True)
class WorldLine:
    family: str
    label: tuple
    x: Expr
    y: Expr
    z: Expr

    @property
    def position(self) -> tuple:
        return (self.x, self.y, self.z)

    def at(self, tv) -> tuple:
        m = {"t": as_expr(tv)}
        return tuple(substitute(e, m) for e in self.position)

    def values(self, ts) -> np.ndarray:
        prog = compile_exprs(self.position, ["t"])
        return prog.eval_points(np.asarray(ts, dtype=float).reshape(-1, 1))


def world_line(family, label=None, params: FamilyParams = FamilyParams()) -> WorldLine:
    fam = family_name(family)
    l0, y0, z0 = _label(fam, label)
    a, b, gamma, rho0 = params.exprs()
    ba = div(b, a)
    y = add(mul(ba, z0, t), y0)
    if fam == "isochoric":
        x = add(mul(t, Phi(params, z0, y0)), l0)
        z = add(neg(mul(gamma, power(t, 2), power(mul(2, a, rho0), -1))), z0)
    else:
        x = sub(mul(l0, t), Phi(params, z0, y0))
        z = add(neg(mul(gamma, power(t, 3), power(mul(6, a, rho0), -1))), z0)
    return WorldLine(fam, (l0, y0, z0), x, y, z)


def jacobian_matrix(family, params: FamilyParams = FamilyParams()) -> list:
    wl = world_line(family, None, params)
    names = label_names(family)
    return [[differentiate(e, n) for n in names] for e in wl.position]


def jacobian_det(family, params: FamilyParams = FamilyParams()) -> Expr:
    return as_expr(linalg.det3(jacobian_matrix(family, params)))


def cofactor_det(m) -> Expr:
    """Determinant by cofactor expansion along the first column (independent of det3)."""
    total = ZERO
    for i in range(3):
        minor = [[m[r][c] for c in (1, 2)] for r in range(3) if r != i]
        cof = sub(mul(minor[0][0], minor[1][1]), mul(minor[0][1], minor[1][0]))
        total = add(total, mul((-1) ** i, m[i][0], cof))
    return total


def jacobian_rank(family, tv, params: FamilyParams = FamilyParams(), seed: int = 0, samples: int = 5) -> int:
    """Generic rank of the Jacobian matrix at time ``tv`` (random labels and derivative values)."""
    m = [[substitute(e, {"t": as_expr(tv)}) for e in row] for row in jacobian_matrix(family, params)]
    rng = random.Random(seed)
    best = 0
    atoms = set()
    for row in m:
        for e in row:
            atoms.update(opaque_atoms(e, frozenset(params.functions())))
    for _ in range(samples):
        b = Binding({n: random_rational(rng) for n in ("a", "b", "gamma", "rho0", *label_names(family))}, params.functions(),
                    {a: random_rational(rng) for a in atoms})
        num = [[evaluate(e, b) for e in row] for row in m]
        best = max(best, linalg.rank(num))
    return best


# -- vorticity -------------------------------------------------------------------

def vorticity(g: GasFields) -> tuple:
    return tuple(g.concrete(c) for c in curl(g.velocity))


def _phi_args(family, params):
    """The Eulerian arguments of Phi in the family's velocity field."""
    g = params.fields(family) if params.phi is None else FamilyParams(*params.exprs(), None, params.f).fields(family)
    from .expr.core import FuncApp, walk

    for node in walk(g.u):
        if isinstance(node, FuncApp) and node.name == "Phi":
            return node.args
    raise ValueError("velocity has no Phi")


def vorticity_closed_form(family, params: FamilyParams = FamilyParams()) -> tuple:
    """The published vorticity, with Phi derivatives at the Eulerian arguments."""
    fam = family_name(family)
    a, b, _, _ = params.exprs()
    A = _phi_args(fam, params)
    p10 = fn("Phi", *A, index=(1, 0))
    p01 = fn("Phi", *A, index=(0, 1))
    if params.phi is not None:
        p10 = substitute(p10, {"Phi": params.phi_lambda})
        p01 = substitute(p01, {"Phi": params.phi_lambda})
    ba = div(b, a)
    if fam == "isochoric":
        return (neg(ba), sub(p10, mul(ba, t, p01)), neg(p01))
    inv_t = power(t, -1)
    return (neg(ba), sub(mul(inv_t, p10), mul(ba, p01)), neg(mul(inv_t, p01)))


def vorticity_in_labels(family, params: FamilyParams = FamilyParams()) -> tuple:
    """Vorticity along the world line: Phi derivatives evaluated at (z0, y0)."""
    wl = world_line(family, None, params)
    m = {"x": wl.x, "y": wl.y, "z": wl.z}
    return tuple(substitute(c, m) for c in vorticity(params.fields(family)))


# -- Lagrangian description --------------------------------------------------------

def lagrangian_fields(family, label=None, tv=None, params: FamilyParams = FamilyParams()) -> dict:
    """Field values carried by the particle ``label`` (at time ``tv`` if given)."""
    fam = family_name(family)
    l0, y0, z0 = _label(fam, label)
    a, b, gamma, rho0 = params.exprs()
    if tv is not None and fam == "blowup" and as_expr(tv).is_zero_literal:
        raise ValueError("the blow-up family is singular at t = 0")
    ga = div(gamma, a)
    if fam == "isochoric":
        out = {
            "u": Phi(params, z0, y0),
            "v": mul(div(b, a), z0),
            "w": neg(mul(gamma, t, power(mul(a, rho0), -1))),
            "rho": rho0,
            "P": mul(ga, z0),
            "S": mul(ga, z0),
        }
    else:
        rho = mul(rho0, power(t, -1))
        f_rho = f_of(rho)
        if params.f is not None:
            f_rho = substitute(f_rho, {"f": params.f_lambda})
        out = {
            "u": l0,
            "v": mul(div(b, a), z0),
            "w": neg(mul(gamma, power(t, 2), power(mul(2, a, rho0), -1))),
            "rho": rho,
            "P": add(mul(ga, z0), f_rho),
            "S": mul(ga, z0),
        }
    if tv is not None:
        out = {k: substitute(v, {"t": as_expr(tv)}) for k, v in out.items()}
    return out


def eulerian_on_world_line(family, label=None, params: FamilyParams = FamilyParams()) -> dict:
    g = params.fields(family)
    wl = world_line(family, label, params)
    m = {"x": wl.x, "y": wl.y, "z": wl.z}
    return {n: substitute(g.concrete(e), m) for n, e in g.items()}


# -- numerical integration -------------------------------------------------------

class TrajectoryError(ValueError):
    pass


@dataclass
class TrajectorySamples:
    rows: np.ndarray  # columns t, x, y, z, u, v, w, rho, P, S
    step: float
    integrator: str = "rk4"
    backend: str = field(default_factory=lambda: kernels.BACKEND)

    COLUMNS = ("t", "x", "y", "z", "u", "v", "w", "rho", "P", "S")

    @property
    def t(self):
        return self.rows[:, 0]

    @property
    def positions(self):
        return self.rows[:, 1:4]


def integrate_trajectory(g: GasFields, start: Sequence[float], t0: float, t1: float, step: float,
                         exclusion: float = EXCLUSION_RADIUS, with_fields: bool = True) -> TrajectorySamples:
    """Fixed-step classical RK4 for dx/dt = u(t, x) from ``start`` at ``t0`` to ``t1``."""
    if step <= 0:
        raise TrajectoryError("step must be positive")
    if t1 == t0:
        raise TrajectoryError("empty time span")
    lo, hi = min(t0, t1), max(t0, t1)
    if g.singular_time and lo < exclusion and hi > -exclusion:
        raise TrajectoryError(f"time span [{lo}, {hi}] reaches the blow-up time t = 0")
    n = max(1, int(math.ceil(abs(t1 - t0) / step - 1e-9)))
    h = (t1 - t0) / n
    vel = [g.concrete(e) for e in g.velocity]
    try:
        prog = compile_exprs(vel, ["t", "x", "y", "z"])
    except Exception as exc:
        raise TrajectoryError(f"velocity field is not concrete: {exc}") from exc
    rows = kernels.rk4(prog.ops, prog.args, prog.consts, prog.offsets, float(t0), np.asarray(start, dtype=float), h, n)
    if not np.all(np.isfinite(rows)):
        raise TrajectoryError("non-finite value during integration")
    if with_fields:
        fprog = compile_exprs([g.concrete(e) for _, e in g.items()], ["t", "x", "y", "z"])
        vals = fprog.eval_points(rows)
        if not np.all(np.isfinite(vals)):
            raise TrajectoryError("non-finite field value along the path")
        rows = np.hstack([rows, vals])
    return TrajectorySamples(rows, abs(h))


def trajectory_error(family, label, params: FamilyParams, t0: float, t1: float, step: float) -> float:
    """Max |RK4 - closed form| over the run, starting on the closed-form world line at ``t0``."""
    g = params.fields(family)
    wl = world_line(family, label, params)
    start = wl.values([t0])[0]
    run = integrate_trajectory(g, start, t0, t1, step, with_fields=False)
    exact = wl.values(run.t)
    return float(np.max(np.abs(run.positions - exact)))


ROUNDOFF_FLOOR = 1e-10


@dataclass(frozen=True)
class Convergence:
    errors: tuple  # error at h, h/2
    step: float

    @property
    def ratio(self) -> float:
        return self.errors[0] / self.errors[1] if self.errors[1] > 0 else math.inf

    @property
    def exact(self) -> bool:
        """Both errors at rounding level: the scheme reproduces this solution exactly."""
        return self.errors[0] < ROUNDOFF_FLOOR

    def order_ok(self, min_ratio: float = 12.0) -> bool:
        return self.exact or self.ratio >= min_ratio


def convergence(family, label, params: FamilyParams, t0: float, t1: float, step: float) -> Convergence:
    e1 = trajectory_error(family, label, params, t0, t1, step)
    e2 = trajectory_error(family, label, params, t0, t1, step / 2)
    return Convergence((e1, e2), step)


# -- geometry ----------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneSpec:
    """Plane n . p = d."""

    normal: tuple
    d: object
    point: Optional[tuple] = None

    def __post_init__(self):
        if all(as_expr(c).is_zero_literal for c in self.normal):
            raise ValueError("plane normal must be nonzero")

    def contains(self, p) -> Expr:
        return sub(add(*(mul(as_expr(n), as_expr(c)) for n, c in zip(self.normal, p))), as_expr(self.d))


@dataclass(frozen=True)
class LineSpec:
    point: tuple
    direction: tuple


@dataclass(frozen=True)
class PathGeometry:
    kind: str  # parabola | cubic | plane | ray | line
    q_vec: tuple
    q2: Expr
    slope: Optional[Expr] = None
    intercept: Optional[Expr] = None
    profile: Optional[Expr] = None  # z as a function of s (arc length of the projection)
    plane_x: Optional[Expr] = None

    @property
    def q(self) -> float:
        return math.sqrt(float(evaluate(self.q2, Binding())))


def _is_zero_value(e: Expr) -> bool:
    e = as_expr(e)
    if e.is_zero_literal:
        return True
    try:
        return evaluate(e, Binding()) == 0
    except Exception:
        return False


def path_geometry(family, label, params: FamilyParams) -> PathGeometry:
    fam = family_name(family)
    l0, y0, z0 = _label(fam, label)
    a, b, gamma, rho0 = params.exprs()
    s = sym("s")
    phi = Phi(params, z0, y0)
    lead = phi if fam == "isochoric" else l0  # x-speed of the projection
    bz = mul(div(b, a), z0)
    q_vec = (lead, bz)
    q2 = add(power(lead, 2), power(bz, 2))
    if _is_zero_value(lead):
        if _is_zero_value(bz):
            return PathGeometry("ray" if fam == "isochoric" else "line", q_vec, q2)
        plane_x = l0 if fam == "isochoric" else neg(phi)
        return PathGeometry("plane", q_vec, q2, plane_x=plane_x)
    slope = div(bz, lead)
    if fam == "isochoric":
        intercept = sub(y0, mul(slope, l0))
        profile = add(neg(mul(gamma, power(mul(2, a, rho0), -1), power(s, 2), power(q2, -1))), z0)
        kind = "parabola"
    else:
        intercept = add(y0, mul(slope, phi))
        q = power(q2, Fraction(1, 2))
        profile = add(neg(mul(gamma, power(mul(6, a, rho0), -1), power(mul(s, power(q, -1)), 3))), z0)
        kind = "cubic"
    return PathGeometry(kind, q_vec, q2, slope, intercept, profile)


def coplanarity_conditions(family, label1, label2, params: FamilyParams) -> tuple:
    """The two quantities that must agree between the particles, per particle."""
    fam = family_name(family)
    out = []
    for lab in (label1, label2):
        l0, y0, z0 = _label(fam, lab)
        geo = path_geometry(fam, lab, params)
        if geo.kind not in ("parabola", "cubic"):
            raise ValueError(f"label {lab}: the projection is not a sloped line ({geo.kind})")
        lead = geo.q_vec[0]
        out.append((div(z0, lead), geo.intercept))
    return tuple(out)


@dataclass(frozen=True)
class CoplanarVerdict:
    coplanar: bool
    conditions: tuple  # ((ratio1, intercept1), (ratio2, intercept2))
    numeric_det: float
    numeric_coplanar: bool
    plane: Optional[PlaneSpec]


def four_point_det(points) -> float:
    """|det(p2-p1, p3-p1, p4-p1)| normalised by the product of the edge lengths."""
    p = np.asarray(points, dtype=float)
    m = p[1:] - p[0]
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0):
        return 0.0
    return abs(float(np.linalg.det(m))) / float(np.prod(norms))


def coplanar(family, label1, label2, params: FamilyParams, times=(-2.0, -1.0, 1.0, 2.0, 3.0), tol: float = 1e-9) -> CoplanarVerdict:
    fam = family_name(family)
    (r1, c1), (r2, c2) = coplanarity_conditions(fam, label1, label2, params)
    same = _is_zero_value(sub(r1, r2)) and _is_zero_value(sub(c1, c2))
    w1 = world_line(fam, label1, params).values(times)
    w2 = world_line(fam, label2, params).values(times)
    worst = 0.0
    for i, j in itertools.combinations(range(len(times)), 2):
        for k, m in itertools.combinations(range(len(times)), 2):
            worst = max(worst, four_point_det([w1[i], w1[j], w2[k], w2[m]]))
    plane = None
    if same:
        geo = path_geometry(fam, label1, params)
        # vertical plane through the common projection line y = slope x + intercept
        plane = PlaneSpec((neg(geo.slope), 1, 0), geo.intercept)
    return CoplanarVerdict(same, ((r1, c1), (r2, c2)), worst, worst < tol, plane)


def moving_plane(tv, y0, params: FamilyParams) -> PlaneSpec:
    """Plane holding, at time tv, the particles that started on y = y0."""
    a, b, gamma, rho0 = params.exprs()
    tv = as_expr(tv)
    ba = div(b, a)
    d = add(as_expr(y0), mul(ba, gamma, power(tv, 3), power(mul(2, a, rho0), -1)))
    return PlaneSpec((0, 1, neg(mul(ba, tv))), d)


def separating_plane(tv, params: FamilyParams) -> PlaneSpec:
    a, b, gamma, rho0 = params.exprs()
    d = neg(mul(3, gamma, power(as_expr(tv), 2), power(mul(2, a, rho0), -1)))
    return PlaneSpec((0, 0, 1), d)


def plane_intersection(p1: PlaneSpec, p2: PlaneSpec) -> LineSpec:
    """Line common to two planes (exact when the coefficients are rational)."""
    n1 = [evaluate(as_expr(c), Binding()) for c in p1.normal]
    n2 = [evaluate(as_expr(c), Binding()) for c in p2.normal]
    d = linalg.cross(n1, n2)
    if all(c == 0 for c in d):
        raise ValueError("planes are parallel")
    d1 = evaluate(as_expr(p1.d), Binding())
    d2 = evaluate(as_expr(p2.d), Binding())
    pt = linalg.solve([n1, n2], [d1, d2])
    return LineSpec(tuple(pt), tuple(d))


def blowup_surface(params: FamilyParams, n: int = 41, lim: float = 2.0) -> np.ndarray:
    """Rows (y0, z0, x, y, z) of the blow-up surface x = -Phi(z0, y0) on an n x n grid."""
    lam = params.phi_lambda
    if lam is None:
        raise ValueError("a concrete Phi is needed to sample the surface")
    prog = compile_exprs([lam.body], list(lam.params))
    ys = np.linspace(-lim, lim, n)
    zs = np.linspace(-lim, lim, n)
    Y, Z = np.meshgrid(ys, zs, indexing="ij")
    pts = np.column_stack([Z.ravel(), Y.ravel()])  # Phi(z0, y0)
    x = -prog.eval_points(pts)[:, 0]
    return np.column_stack([Y.ravel(), Z.ravel(), x, Y.ravel(), Z.ravel()])


def blowup_line(y0, z0, tv, params: FamilyParams) -> LineSpec:
    """At time tv the particles leaving (-Phi(z0,y0), y0, z0) lie on a line parallel to Ox."""
    if as_expr(tv).is_zero_literal:
        raise ValueError("t = 0 is the blow-up time")
    wl = world_line("blowup", ("u0", y0, z0), params)
    base = tuple(substitute(e, {"t": as_expr(tv), "u0": as_expr(0)}) for e in wl.position)
    direction = tuple(differentiate(substitute(e, {"t": as_expr(tv)}), "u0") for e in wl.position)
    return LineSpec(base, direction)


__all__ = [
    "CoplanarVerdict",
    "Convergence",
    "EXCLUSION_RADIUS",
    "FIG1",
    "FIG3",
    "FamilyParams",
    "LineSpec",
    "PathGeometry",
    "PlaneSpec",
    "TrajectoryError",
    "TrajectorySamples",
    "WorldLine",
    "blowup_line",
    "blowup_surface",
    "cofactor_det",
    "convergence",
    "coplanar",
    "coplanarity_conditions",
    "eulerian_on_world_line",
    "four_point_det",
    "integrate_trajectory",
    "jacobian_det",
    "jacobian_matrix",
    "jacobian_rank",
    "lagrangian_fields",
    "moving_plane",
    "path_geometry",
    "plane_intersection",
    "separating_plane",
    "trajectory_error",
    "vorticity",
    "vorticity_closed_form",
    "vorticity_in_labels",
    "world_line",
]
