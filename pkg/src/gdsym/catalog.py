"""The fifty four-dimensional subalgebras with their invariants, and their checks."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from . import linalg
from .expr import (
    NONZERO,
    SYMBOLIC_ZERO,
    Binding,
    Expr,
    ParseError,
    Power,
    Symbol,
    ZeroPolicy,
    add,
    clear_denominators,
    const,
    differentiate,
    evaluate,
    free_symbols,
    is_zero,
    mul,
    parse,
    power,
    random_rational,
    sub,
    substitute,
    sym,
)
from .expr.core import children, rebuild
from .lie import COORDS, DIM, StructureTable, VectorField, apply, combine
from .report import Report

SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "required": ["id", "parameters", "generators", "invariants"],
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "basis": {"type": "string"},
            "parameters": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name"],
                    "properties": {
                        "name": {"type": "string", "pattern": "^[A-Za-z][A-Za-z0-9_]*$"},
                        "nonzero": {"type": "boolean"},
                        "binary": {"type": "boolean"},
                        "not_equal": {"type": "array", "items": {"type": ["integer", "string"]}},
                    },
                    "additionalProperties": False,
                },
            },
            "constraints": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["kind", "names"],
                    "properties": {
                        "kind": {"enum": ["sum_of_squares", "sum_of_squares_nonzero"]},
                        "names": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                        "equals": {"type": ["integer", "string"]},
                    },
                    "additionalProperties": False,
                },
            },
            "generators": {
                "type": "array",
                "minItems": 4,
                "maxItems": 4,
                "items": {"type": "array", "minItems": DIM, "maxItems": DIM, "items": {"type": "string"}},
            },
            "invariants": {"type": "array", "minItems": 4, "maxItems": 4, "items": {"type": "string"}},
        },
        "additionalProperties": False,
    },
}

EXPECTED_SIZE = 50


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class ParameterDomain:
    names: tuple
    nonzero: frozenset = frozenset()
    not_equal: tuple = ()  # (name, value) pairs
    binary: frozenset = frozenset()
    constraints: tuple = ()  # dicts as in the catalog file

    def check(self, values) -> bool:
        """True if ``values`` satisfy every constraint exactly."""
        for n in self.nonzero:
            if values[n] == 0:
                return False
        for n, v in self.not_equal:
            if values[n] == v:
                return False
        for n in self.binary:
            if values[n] not in (0, 1):
                return False
        for c in self.constraints:
            s = sum(Fraction(values[n]) ** 2 for n in c["names"])
            if c["kind"] == "sum_of_squares_nonzero":
                if s == 0:
                    return False
            else:
                target = c.get("equals", 1)
                target = values[target] if isinstance(target, str) else target
                if s != target:
                    return False
        return True


def _sphere_point(rng, n, height):
    """Rational point on the unit sphere in n dimensions (inverse stereographic)."""
    qs = [random_rational(rng, height) * rng.choice((1, -1)) for _ in range(n - 1)]
    d = 1 + sum(q * q for q in qs)
    pt = [(1 - sum(q * q for q in qs)) / d] + [2 * q / d for q in qs]
    rng.shuffle(pt)
    return pt


def sample_parameters(domain: ParameterDomain, seed=0, height: int = 13, retries: int = 200) -> dict:
    """Exact rational parameter values satisfying every constraint of ``domain``."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    for _ in range(retries):
        vals = {}
        for n in domain.binary:
            vals[n] = Fraction(rng.randint(0, 1))
        for c in domain.constraints:
            if c["kind"] != "sum_of_squares":
                continue
            target = c.get("equals", 1)
            target = vals[target] if isinstance(target, str) else Fraction(target)
            if target == 0:
                pt = [Fraction(0)] * len(c["names"])
            elif target == 1:
                pt = _sphere_point(rng, len(c["names"]), height)
            else:
                raise CatalogError(f"unsupported sum-of-squares target {target}")
            vals.update(zip(c["names"], pt))
        for n in domain.names:
            if n not in vals:
                vals[n] = random_rational(rng, height) * rng.choice((1, -1))
        if domain.check(vals):
            return vals
    raise CatalogError(f"could not sample admissible parameters for {domain}")


@dataclass(frozen=True)
class SubalgebraSpec:
    id: str
    params: ParameterDomain
    generators: tuple  # 4 tuples of 12 Exprs
    basis: str = ""

    def fields(self) -> list:
        return [combine(g) for g in self.generators]

    def bound_generators(self, values) -> list:
        m = {k: const(v) for k, v in values.items()}
        return [[evaluate(substitute(c, m), Binding()) for c in g] for g in self.generators]


@dataclass(frozen=True)
class InvariantSet:
    id: str
    invariants: tuple

    def with_density(self) -> tuple:
        return self.invariants + (sym("rho"),)


@dataclass(frozen=True)
class CatalogEntry:
    spec: SubalgebraSpec
    invariants: InvariantSet

    @property
    def id(self) -> str:
        return self.spec.id


def _parse_in(entry_id, text, where):
    try:
        return parse(text)
    except ParseError as exc:
        raise CatalogError(f"entry {entry_id}: {where}: {exc}") from exc


def load_catalog(path=None, expected_size: Optional[int] = EXPECTED_SIZE) -> list:
    if path is None:
        text = resources.files("gdsym").joinpath("data/catalog.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text) if text.strip() else None
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise CatalogError(f"schema violation at /{where}: {exc.message}") from exc
    seen = set()
    out = []
    for item in data:
        eid = item["id"]
        if eid in seen:
            raise CatalogError(f"duplicate id {eid!r}")
        seen.add(eid)
        params = item["parameters"]
        names = tuple(p["name"] for p in params)
        for c in item.get("constraints", []):
            refs = set(c["names"]) | ({c["equals"]} if isinstance(c.get("equals"), str) else set())
            if not refs <= set(names):
                raise CatalogError(f"entry {eid}: constraint references undeclared {sorted(refs - set(names))}")
        dom = ParameterDomain(
            names,
            frozenset(p["name"] for p in params if p.get("nonzero")),
            tuple((p["name"], Fraction(v)) for p in params for v in p.get("not_equal", [])),
            frozenset(p["name"] for p in params if p.get("binary")),
            tuple(item.get("constraints", [])),
        )
        gens = tuple(
            tuple(_parse_in(eid, s, f"generator {g + 1} component {k + 1}") for k, s in enumerate(row))
            for g, row in enumerate(item["generators"])
        )
        invs = tuple(_parse_in(eid, s, f"invariant {k + 1}") for k, s in enumerate(item["invariants"]))
        allowed = set(names) | set(COORDS)
        for e in [c for g in gens for c in g] + list(invs):
            extra = free_symbols(e) - allowed
            if extra:
                raise CatalogError(f"entry {eid}: undeclared symbols {sorted(extra)}")
        out.append(CatalogEntry(SubalgebraSpec(eid, dom, gens, item.get("basis", "")), InvariantSet(eid, invs)))
    if expected_size is not None and len(out) != expected_size:
        raise CatalogError(f"catalog has {len(out)} entries, expected {expected_size}")
    return out


def select(entries, ident: Optional[str]) -> list:
    """Entries whose id equals ``ident`` or starts with ``ident + '/'``."""
    if not ident:
        return list(entries)
    return [e for e in entries if e.id == ident or e.id.startswith(ident + "/")]


# -- closure ------------------------------------------------------------------


def closure_defect(gens: Sequence[Sequence[Fraction]], table: StructureTable):
    """First pair (i, j, bracket) whose bracket leaves the span, else None."""
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            br = table.bracket_coeffs(gens[i], gens[j])
            if linalg.rank(list(gens) + [br]) > len(gens):
                return i, j, br
    return None


def verify_closure(spec: SubalgebraSpec, table: StructureTable, policy: ZeroPolicy = ZeroPolicy()) -> dict:
    rng = random.Random(policy.seed)
    for _ in range(policy.samples):
        vals = sample_parameters(spec.params, rng)
        gens = spec.bound_generators(vals)
        r = linalg.rank(gens)
        if r != len(gens):
            return {"ok": False, "verdict": "rank-deficient-basis", "witness": {"params": _fmt(vals), "rank": r}}
        bad = closure_defect(gens, table)
        if bad is not None:
            i, j, br = bad
            return {
                "ok": False,
                "verdict": "not-closed",
                "witness": {"params": _fmt(vals), "pair": [i + 1, j + 1], "bracket": [str(v) for v in br]},
            }
    return {"ok": True, "verdict": "closed", "draws": policy.samples}


def _fmt(vals):
    return {k: str(v) for k, v in sorted(vals.items())}


# -- annihilation -------------------------------------------------------------


def _constraint_rules(domain: ParameterDomain) -> dict:
    """name -> replacement for name**2 implied by sum-of-squares constraints equal to 1."""
    rules = {}
    for c in domain.constraints:
        if c["kind"] == "sum_of_squares" and c.get("equals", 1) == 1:
            *rest, last = c["names"]
            rules[last] = sub(1, add(*(power(sym(n), 2) for n in rest)))
    return rules


def reduce_by_constraints(e: Expr, domain: ParameterDomain) -> Expr:
    rules = _constraint_rules(domain)
    if not rules:
        return e
    for _ in range(4):
        new = _rewrite_squares(e, rules)
        if new == e:
            break
        e = new
    return e


def _rewrite_squares(e: Expr, rules) -> Expr:
    if isinstance(e, Power) and isinstance(e.base, Symbol) and e.base.name in rules and e.exp.denominator == 1 and abs(e.exp) >= 2:
        n = int(abs(e.exp))
        out = mul(power(rules[e.base.name], n // 2), power(e.base, n % 2))
        return power(out, -1) if e.exp < 0 else out
    kids = children(e)
    if not kids:
        return e
    new = [_rewrite_squares(k, rules) for k in kids]
    return e if all(a is b for a, b in zip(kids, new)) else rebuild(e, new)


def annihilation_verdict(X: VectorField, inv: Expr, domain: ParameterDomain, policy: ZeroPolicy):
    e = apply(X, inv)
    if e.is_zero_literal:
        return e, None
    r = clear_denominators(reduce_by_constraints(e, domain))
    if r.is_zero_literal:
        return e, None
    params = set(domain.names)

    def sampler(rng):
        return sample_parameters(domain, rng)

    return e, is_zero(e, policy, sampler=sampler if params & free_symbols(e) else None)


def verify_invariants(spec: SubalgebraSpec, inv: InvariantSet, policy: ZeroPolicy = ZeroPolicy()) -> list:
    """One result per (generator, invariant) pair, rho included: 4 x 5 = 20."""
    out = []
    for g, X in enumerate(spec.fields()):
        for k, I in enumerate(inv.with_density()):
            e, verdict = annihilation_verdict(X, I, spec.params, policy)
            if verdict is None:
                out.append({"generator": g + 1, "invariant": k + 1, "ok": True, "verdict": SYMBOLIC_ZERO})
            else:
                res = {"generator": g + 1, "invariant": k + 1, "ok": verdict.is_zero, "verdict": verdict.kind}
                if verdict.kind == NONZERO:
                    res["witness"] = {"expression": str(e), **verdict.to_json()}
                out.append(res)
    return out


# -- independence -------------------------------------------------------------


def jacobian_rank(invariants: Sequence[Expr], scalars: dict, tol: float = 1e-8) -> int:
    b = Binding(scalars)
    rows = [[float(evaluate(differentiate(I, c), b)) for c in COORDS] for I in invariants]
    s = np.linalg.svd(np.array(rows, dtype=float), compute_uv=False)
    return int(np.sum(s > tol))


def verify_independence(inv: InvariantSet, domain: Optional[ParameterDomain] = None, policy: ZeroPolicy = ZeroPolicy(),
                        points: int = 3, tol: float = 1e-8) -> dict:
    rng = random.Random(policy.seed + 7919)
    exprs = inv.with_density()
    grads = [[differentiate(I, c) for c in COORDS] for I in exprs]
    ranks = []
    done = 0
    attempts = 0
    while done < points:
        attempts += 1
        if attempts > 50 * points:
            return {"ok": False, "verdict": "no-admissible-point", "ranks": ranks}
        vals = sample_parameters(domain, rng) if domain is not None else {}
        vals.update({c: random_rational(rng, 29) for c in COORDS})
        b = Binding(vals)
        try:
            rows = [[float(evaluate(g, b)) for g in row] for row in grads]
        except ZeroDivisionError:
            continue
        s = np.linalg.svd(np.array(rows), compute_uv=False)
        r = int(np.sum(s > tol))
        ranks.append(r)
        done += 1
        if r != len(exprs):
            return {"ok": False, "verdict": "rank-deficient", "witness": {"point": _fmt(vals), "rank": r}, "ranks": ranks}
    return {"ok": True, "verdict": f"rank {len(exprs)}", "ranks": ranks}


# -- sweep --------------------------------------------------------------------


def singular_sets(inv: InvariantSet) -> list:
    """Denominators of the invariants that depend on coordinates; verdicts hold off their zero sets."""
    from .expr import to_string

    found, stack = {}, list(inv.invariants)
    while stack:
        e = stack.pop()
        if isinstance(e, Power) and e.exp < 0 and free_symbols(e.base) & set(COORDS):
            found[e.base._key] = e.base
        stack.extend(children(e))
    return sorted(to_string(b) for b in found.values())


def verify_entry(entry: CatalogEntry, table: StructureTable, policy: ZeroPolicy = ZeroPolicy(), report: Optional[Report] = None,
                 points: int = 3) -> Report:
    rep = report if report is not None else Report("subalgebras", policy.seed)
    with rep.timed(f"{entry.id}: closure") as r:
        r.update(verify_closure(entry.spec, table, policy))
    with rep.timed(f"{entry.id}: annihilation") as r:
        pairs = verify_invariants(entry.spec, entry.invariants, policy)
        bad = [p for p in pairs if not p["ok"]]
        r["ok"] = not bad
        kinds = sorted({p["verdict"] for p in pairs})
        r["verdict"] = "candidate-erratum" if bad else "+".join(kinds)
        r["pairs"] = len(pairs)
        sing = singular_sets(entry.invariants)
        if sing:
            r["domain"] = "verified off the zero set of " + ", ".join(sing)
        if bad:
            r["witness"] = bad[0]
            r["failures"] = bad
    with rep.timed(f"{entry.id}: independence") as r:
        r.update(verify_independence(entry.invariants, entry.spec.params, policy, points=points))
    return rep


def verify_catalog(entries=None, table: Optional[StructureTable] = None, policy: ZeroPolicy = ZeroPolicy(), points: int = 3) -> Report:
    from .lie import reference_table

    entries = load_catalog() if entries is None else entries
    table = reference_table() if table is None else table
    rep = Report("subalgebras", policy.seed)
    for e in entries:
        verify_entry(e, table, policy, rep, points=points)
    return rep


__all__ = [
    "CatalogEntry",
    "CatalogError",
    "InvariantSet",
    "ParameterDomain",
    "SCHEMA",
    "SubalgebraSpec",
    "closure_defect",
    "jacobian_rank",
    "load_catalog",
    "reduce_by_constraints",
    "sample_parameters",
    "select",
    "verify_catalog",
    "verify_closure",
    "verify_entry",
    "verify_independence",
    "verify_invariants",
]
