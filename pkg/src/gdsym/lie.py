"""Vector fields on (t,x,y,z,u,v,w,rho,P), brackets, structure constants and automorphisms."""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence

from . import linalg
from .expr import ZERO, Expr, ExprError, ZeroPolicy, add, apply_field, as_expr, binding, evaluate, is_zero, mul, random_rational, sub
from .report import Report

COORDS = ("t", "x", "y", "z", "u", "v", "w", "rho", "P")
DIM = 12
NAMES = tuple(f"X{i}" for i in range(1, 12)) + ("Y1",)


class BracketNotInSpan(ExprError):
    def __init__(self, i, j, residual):
        super().__init__(f"[{NAMES[i]}, {NAMES[j]}] is not in the span of the basis")
        self.pair = (i + 1, j + 1)
        self.residual = residual


@dataclass(frozen=True)
class VectorField:
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != len(COORDS):
            raise ValueError(f"need {len(COORDS)} coefficients")
        object.__setattr__(self, "coeffs", tuple(as_expr(c) for c in self.coeffs))

    @classmethod
    def of(cls, **parts) -> "VectorField":
        """``VectorField.of(x="t", u=1)`` is t d/dx + d/du."""
        unknown = set(parts) - set(COORDS)
        if unknown:
            raise KeyError(f"unknown coordinates {sorted(unknown)}")
        return cls(tuple(as_expr(parts.get(c, 0)) for c in COORDS))

    @classmethod
    def zero(cls) -> "VectorField":
        return cls((ZERO,) * len(COORDS))

    def __call__(self, e) -> Expr:
        return apply(self, e)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(sub(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c) -> "VectorField":
        c = as_expr(c)
        return VectorField(tuple(mul(c, a) for a in self.coeffs))

    __rmul__ = scale

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero_literal for c in self.coeffs)

    def component(self, name: str) -> Expr:
        return self.coeffs[COORDS.index(name)]

    def __str__(self):
        parts = [f"({c})*d_{n}" for c, n in zip(self.coeffs, COORDS) if not c.is_zero_literal]
        return " + ".join(parts) or "0"


def apply(X: VectorField, e) -> Expr:
    return apply_field(X.coeffs, COORDS, as_expr(e))


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    return VectorField(tuple(sub(apply(X, eta), apply(Y, xi)) for xi, eta in zip(X.coeffs, Y.coeffs)))


def combine(coeffs: Sequence, basis: Optional[Sequence[VectorField]] = None) -> VectorField:
    """The field sum(coeffs[i] * basis[i])."""
    basis = BASIS if basis is None else basis
    out = VectorField.zero()
    for c, X in zip(coeffs, basis):
        c = as_expr(c)
        if not c.is_zero_literal:
            out = out + X.scale(c)
    return out


BASIS = (
    VectorField.of(x=1),
    VectorField.of(y=1),
    VectorField.of(z=1),
    VectorField.of(x="t", u=1),
    VectorField.of(y="t", v=1),
    VectorField.of(z="t", w=1),
    VectorField.of(z="y", y="-z", w="v", v="-w"),
    VectorField.of(x="z", z="-x", u="w", w="-u"),
    VectorField.of(y="x", x="-y", v="u", u="-v"),
    VectorField.of(t=1),
    VectorField.of(t="t", x="x", y="y", z="z"),
    VectorField.of(P=1),
)


class StructureTable:
    """``c[i][j][k]`` with 0-based indices; ``entry`` takes 1-based ones."""

    def __init__(self, c):
        self.c = [[tuple(Fraction(v) for v in c[i][j]) for j in range(DIM)] for i in range(DIM)]

    @classmethod
    def from_entries(cls, entries) -> "StructureTable":
        c = [[[Fraction(0)] * DIM for _ in range(DIM)] for _ in range(DIM)]
        for e in entries:
            i, j, k = e["i"] - 1, e["j"] - 1, e["k"] - 1
            c[i][j][k] = Fraction(e["c"])
        return cls(c)

    def entry(self, i: int, j: int, k: int) -> Fraction:
        return self.c[i - 1][j - 1][k - 1]

    def nonzero_entries(self) -> list:
        return [
            {"i": i + 1, "j": j + 1, "k": k + 1, "c": v}
            for i in range(DIM)
            for j in range(DIM)
            for k, v in enumerate(self.c[i][j])
            if v != 0
        ]

    def bracket_coeffs(self, x: Sequence, y: Sequence) -> list:
        """Coordinates of [x, y] for coefficient vectors x, y (numbers or Exprs)."""
        out = [0] * DIM
        for i, xi in enumerate(x):
            if _is0(xi):
                continue
            for j, yj in enumerate(y):
                if _is0(yj):
                    continue
                row = self.c[i][j]
                for k in range(DIM):
                    if row[k]:
                        out[k] = out[k] + row[k] * xi * yj
        return out

    def antisymmetry_violations(self) -> list:
        return [(i + 1, j + 1) for i in range(DIM) for j in range(DIM) if any(a + b for a, b in zip(self.c[i][j], self.c[j][i]))]

    def __eq__(self, other):
        return isinstance(other, StructureTable) and self.c == other.c

    def diff(self, other: "StructureTable") -> list:
        return [
            (i + 1, j + 1, k + 1, self.c[i][j][k], other.c[i][j][k])
            for i in range(DIM)
            for j in range(DIM)
            for k in range(DIM)
            if self.c[i][j][k] != other.c[i][j][k]
        ]


def _is0(v) -> bool:
    if isinstance(v, Expr):
        return v.is_zero_literal
    return v == 0


def reference_table() -> StructureTable:
    data = json.loads(resources.files("gdsym").joinpath("data/table1.json").read_text())
    return StructureTable.from_entries(data["entries"])


def _sample_points(rng, n, height=29):
    return [{c: random_rational(rng, height) for c in COORDS} for _ in range(n)]


def express_in_basis(F: VectorField, basis=BASIS, policy: ZeroPolicy = ZeroPolicy(), points: int = 3):
    """Coefficients of ``F`` in ``basis`` (constants), or None when F is outside the span.

    Solved exactly from values at random points, then confirmed symbolically.
    """
    rng = random.Random(policy.seed)
    rows, rhs = [], []
    for pt in _sample_points(rng, points):
        b = binding(pt)
        vals = [[evaluate(c, b) for c in X.coeffs] for X in basis]
        fv = [evaluate(c, b) for c in F.coeffs]
        for k in range(len(COORDS)):
            rows.append([vals[m][k] for m in range(len(basis))])
            rhs.append(fv[k])
    sol = linalg.solve(rows, rhs)
    if sol is None:
        return None
    residual = F - combine(sol, basis)
    for c in residual.coeffs:
        if not is_zero(c, policy).is_zero:
            return None
    return sol


def compute_structure_table(basis: Sequence[VectorField] = BASIS, policy: ZeroPolicy = ZeroPolicy()) -> StructureTable:
    n = len(basis)
    c = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            B = bracket(basis[i], basis[j])
            if B.is_zero:
                continue
            sol = express_in_basis(B, basis, policy)
            if sol is None:
                raise BracketNotInSpan(i, j, B)
            c[i][j] = sol
            c[j][i] = [-v for v in sol]
    return StructureTable(c)


def jacobi_defect(table: StructureTable, i: int, j: int, k: int) -> list:
    """Coordinates of [[e_i,e_j],e_k] + cyclic, 0-based indices."""
    c = table.c
    out = []
    for l in range(DIM):
        s = Fraction(0)
        for m in range(DIM):
            s += c[i][j][m] * c[m][k][l] + c[j][k][m] * c[m][i][l] + c[k][i][m] * c[m][j][l]
        out.append(s)
    return out


def verify_jacobi(table: StructureTable, seed: int = 0) -> Report:
    rep = Report("jacobi", seed)
    for i, j, k in itertools.combinations(range(DIM), 3):
        with rep.timed(f"({i + 1},{j + 1},{k + 1})") as r:
            d = jacobi_defect(table, i, j, k)
            r["ok"] = not any(d)
            r["verdict"] = "symbolic-zero" if r["ok"] else "nonzero"
            if not r["ok"]:
                r["witness"] = {"defect": [str(v) for v in d]}
    return rep


# -- automorphisms ------------------------------------------------------------

FAMILIES = ("T", "Gamma", "O", "A10", "A11", "eps1", "eps2", "outer")


def rotation_from(s: Fraction):
    """Rational (cos, sin) with cos^2 + sin^2 = 1."""
    d = 1 + s * s
    return (1 - s * s) / d, 2 * s / d


def rotation_matrix(s1, s2, s3):
    c1, n1 = rotation_from(Fraction(s1))
    c2, n2 = rotation_from(Fraction(s2))
    c3, n3 = rotation_from(Fraction(s3))
    rx = [[1, 0, 0], [0, c1, -n1], [0, n1, c1]]
    ry = [[c2, 0, n2], [0, 1, 0], [-n2, 0, c2]]
    rz = [[c3, -n3, 0], [n3, c3, 0], [0, 0, 1]]
    return _matmul(_matmul(rx, ry), rz)


def _matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


@dataclass(frozen=True)
class AutomorphismSpec:
    family: str
    alpha1: tuple = (0, 0, 0)
    alpha2: tuple = (0, 0, 0)
    a10: object = 0
    a11: object = 1
    b1: object = 1
    angles: tuple = (0, 0, 0)  # rational parameters of the three axis rotations

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown automorphism family {self.family!r}")
        if self.family == "A11" and _is0(self.a11):
            raise ValueError("a11 must be nonzero")
        if self.family == "outer" and _is0(self.b1):
            raise ValueError("b1 must be nonzero")

    def matrix(self) -> list:
        """12x12 matrix M with M[:, i] the image of e_i (exact)."""
        cols = [apply_automorphism(self, [Fraction(int(k == i)) for k in range(DIM)]) for i in range(DIM)]
        return [[cols[j][i] for j in range(DIM)] for i in range(DIM)]


def _p(v, k):
    return list(v[3 * k: 3 * k + 3])


def _lin(a, b, s=1):
    return [x + s * y for x, y in zip(a, b)]


def _scal(c, a):
    return [c * x for x in a]


def apply_automorphism(A: AutomorphismSpec, coeffs: Sequence) -> list:
    """Image of a coefficient vector (x1..x11, y0); unlisted components are kept."""
    if len(coeffs) != DIM:
        raise ValueError("need 12 coefficients")
    v = list(coeffs)
    p1, p2, p3 = _p(v, 0), _p(v, 1), _p(v, 2)
    x10, x11, y0 = v[9], v[10], v[11]
    f = A.family
    if f == "T":
        a1 = list(A.alpha1)
        p1 = _lin(_lin(p1, _scal(x11, a1)), linalg.cross(a1, p3), -1)
    elif f == "Gamma":
        a2 = list(A.alpha2)
        p1 = _lin(p1, _scal(x10, a2), -1)
        p2 = _lin(p2, linalg.cross(a2, p3), -1)
    elif f == "O":
        O = rotation_matrix(*A.angles)
        p1, p2, p3 = (linalg.matvec(O, p) if all(isinstance(q, (int, Fraction)) for q in p) else _matvec_generic(O, p) for p in (p1, p2, p3))
    elif f == "A10":
        p1 = _lin(p1, _scal(A.a10, p2))
        x10 = x10 + A.a10 * x11
    elif f == "A11":
        p1 = _scal(A.a11, p1)
        x10 = A.a11 * x10
    elif f == "eps1":
        p1 = _scal(-1, p1)
        p2 = _scal(-1, p2)
    elif f == "eps2":
        p2 = _scal(-1, p2)
        x10 = -x10
    elif f == "outer":
        y0 = A.b1 * y0
    return p1 + p2 + p3 + [x10, x11, y0]


def _matvec_generic(m, v):
    return [add(*(mul(as_expr(m[i][j]), as_expr(v[j])) for j in range(3))) for i in range(3)]


def random_automorphism(family: str, rng: random.Random, height: int = 19) -> AutomorphismSpec:
    r = lambda: random_rational(rng, height)  # noqa: E731  (nonzero by construction)
    if family == "T":
        return AutomorphismSpec("T", alpha1=(r(), r(), r()))
    if family == "Gamma":
        return AutomorphismSpec("Gamma", alpha2=(r(), r(), r()))
    if family == "O":
        return AutomorphismSpec("O", angles=(r(), r(), r()))
    if family == "A10":
        return AutomorphismSpec("A10", a10=r())
    if family == "A11":
        return AutomorphismSpec("A11", a11=r())
    if family == "outer":
        return AutomorphismSpec("outer", b1=r())
    return AutomorphismSpec(family)


def automorphism_defects(A: AutomorphismSpec, table: StructureTable) -> list:
    """Pairs (i, j) (1-based) with M[e_i, e_j] != [M e_i, M e_j]."""
    M = A.matrix()
    cols = [[M[r][i] for r in range(DIM)] for i in range(DIM)]
    bad = []
    for i in range(DIM):
        for j in range(i + 1, DIM):
            lhs = linalg.matvec(M, list(table.c[i][j]))
            rhs = table.bracket_coeffs(cols[i], cols[j])
            if any(a != b for a, b in zip(lhs, rhs)):
                bad.append((i + 1, j + 1))
    return bad


def verify_automorphism(A: AutomorphismSpec, table: StructureTable) -> dict:
    M = A.matrix()
    bad = automorphism_defects(A, table)
    invertible = linalg.rank(M) == DIM
    return {"ok": not bad and invertible, "bad_pairs": bad, "invertible": invertible}


def verify_automorphisms(table: StructureTable, draws: int = 20, seed: int = 0, families=FAMILIES) -> Report:
    rep = Report("automorphisms", seed)
    rng = random.Random(seed)
    for fam in families:
        with rep.timed(fam) as r:
            n = draws if fam not in ("eps1", "eps2") else 1
            failures = []
            for _ in range(n):
                A = random_automorphism(fam, rng)
                res = verify_automorphism(A, table)
                if not res["ok"]:
                    failures.append({"spec": _spec_json(A), **res})
            r["ok"] = not failures
            r["verdict"] = "bracket-preserving" if not failures else "not-preserving"
            r["draws"] = n
            if failures:
                r["witness"] = failures[0]
    return rep


def _spec_json(A: AutomorphismSpec) -> dict:
    return {k: [str(x) for x in v] if isinstance(v, tuple) else str(v) for k, v in A.__dict__.items()}


def verify_commutators(policy: ZeroPolicy = ZeroPolicy(), reference: Optional[StructureTable] = None) -> Report:
    """Recompute every bracket [X_i, X_j], i < j, and compare with the reference table."""
    reference = reference or reference_table()
    rep = Report("commutators", policy.seed)
    bad_ref = reference.antisymmetry_violations()
    if bad_ref:
        rep.add("reference-antisymmetry", False, "nonzero", {"pairs": bad_ref})
    for i in range(DIM):
        for j in range(i + 1, DIM):
            with rep.timed(f"[{NAMES[i]},{NAMES[j]}]") as r:
                B = bracket(BASIS[i], BASIS[j])
                expected = combine(reference.c[i][j])
                diffs = [is_zero(sub(a, b), policy) for a, b in zip(B.coeffs, expected.coeffs)]
                r["ok"] = all(d.is_zero for d in diffs)
                kinds = {d.kind for d in diffs}
                r["verdict"] = "symbolic-zero" if kinds == {"symbolic-zero"} else ("nonzero" if not r["ok"] else "probabilistic-zero")
                if not r["ok"]:
                    r["witness"] = {"bracket": str(B), "expected": str(expected)}
    return rep


__all__ = [
    "AutomorphismSpec",
    "BASIS",
    "BracketNotInSpan",
    "COORDS",
    "FAMILIES",
    "NAMES",
    "StructureTable",
    "VectorField",
    "apply",
    "apply_automorphism",
    "bracket",
    "combine",
    "compute_structure_table",
    "express_in_basis",
    "jacobi_defect",
    "reference_table",
    "verify_automorphism",
    "verify_automorphisms",
    "verify_commutators",
    "verify_jacobi",
]
