import random
from fractions import Fraction

import pytest

from gdsym import gas
from gdsym.expr import ZeroPolicy, binding, const, evaluate, fn, is_zero, neg, parse, sub, sym
from gdsym.gas import (
    SubmodelFields,
    SymmetryTransformation,
    apply_symmetry,
    build_blowup_family,
    build_isochoric_family,
    f_of,
    residuals,
)

FIG = dict(a=Fraction(4, 5), b=Fraction(3, 5), gamma=1, rho0=1)


def all_zero(g, policy=ZeroPolicy()):
    return {n: v.kind for n, v in gas.residual_verdicts(g, policy).items() if not v.is_zero}


def test_isochoric_symbolic():
    assert all(e.is_zero_literal for e in residuals(build_isochoric_family()).as_tuple())


def test_blowup_symbolic():
    g = build_blowup_family()
    r = residuals(g)
    assert all(e.is_zero_literal for e in r.as_tuple())
    cont_parts = sub(gas.material_derivative(g, g.rho), parse("-rho0/t^2"))
    assert cont_parts.is_zero_literal


def test_rest_state():
    assert all(e.is_zero_literal for e in residuals(gas.rest_state()).as_tuple())


def test_isochoric_values():
    g = build_isochoric_family(**FIG)
    assert g.w == parse("-5*t/4")
    g0 = build_isochoric_family(a=FIG["a"], b=FIG["b"], gamma=0, rho0=1)
    assert g0.v == parse("3*z/4") and g0.w == const(0)
    assert g0.P == const(0) and g0.S == const(0)
    rays = build_isochoric_family(a=1, b=0, gamma=1, rho0=1, phi="0")
    assert rays.u == const(0)


def test_blowup_values():
    g = build_blowup_family(a=FIG["a"], b=FIG["b"], gamma=1, rho0=1, phi="0")
    assert evaluate(g.u, binding({"t": 1, "x": 0, "y": 3, "z": 2})) == 0
    assert evaluate(g.w, binding({"t": 2})) == Fraction(-5, 2)
    gs = build_blowup_family()
    assert sub(gs.S, gs.P) == neg(f_of(parse("rho0/t")))


def test_a_zero_rejected():
    for build in (build_isochoric_family, build_blowup_family):
        with pytest.raises(ValueError):
            build(a=0)


def test_blowup_singular_at_zero():
    g = build_blowup_family(**FIG, phi="arg1", f="arg1")
    with pytest.raises(ValueError):
        g.values_at(0, 1, 1, 1)
    assert g.values_at(Fraction(1, 2), 1, 1, 1)["rho"] == 2


def test_non_solution_detected():
    g = build_isochoric_family(**FIG)
    bad = gas.GasFields(g.u, g.v, const(0), g.rho, g.P, g.S, state_offset=g.state_offset)
    assert "r_mz" in all_zero(bad)


def test_pressure_form_identity():
    for g in (build_isochoric_family(), build_blowup_family()):
        assert is_zero(gas.pressure_form_identity(g)).is_zero


def test_numeric_spot_check():
    g = build_isochoric_family(**FIG, phi="arg1 + arg2").bind(f="arg1^3")
    assert gas.numeric_residuals(g, points=50) < 1e-10
    h = build_blowup_family(**FIG, phi="-arg1^2 - arg2^2", f="arg1^3")
    assert gas.numeric_residuals(h, points=50) < 1e-10


def test_numeric_spot_check_sees_perturbation():
    g = build_isochoric_family(**FIG, phi="arg1 + arg2").bind(f="arg1^3")
    bad = gas.GasFields(g.u, g.v, sub(g.w, parse("t/100")), g.rho, g.P, g.S, g.state_offset, g.params, g.functions)
    assert gas.numeric_residuals(bad, points=50) > 1e-4


# -- submodel ------------------------------------------------------------------

def test_submodel_family1_data():
    a, b, g, r0 = (sym(n) for n in ("a", "b", "gamma", "rho0"))
    s = SubmodelFields(
        u=fn("U", *(sym(n) for n in ("t", "x", "y", "z"))),
        v1=parse("gamma*b*t^2/(2*a^2*rho0)"),
        w1=parse("-gamma*t/(a*rho0)"),
        rho=r0,
        S1=parse("gamma^2*t^2/(2*a^2*rho0)"),
        P1=parse("gamma^2*t^2/(2*a^2*rho0)"),
    )
    res = gas.submodel_residuals(s)
    # continuity and state need u_x = 0 and f(rho0) = 0; the other four vanish outright
    assert [e.is_zero_literal for e in (res[1], res[2], res[4])] == [True, True, True]


def test_submodel_non_solution():
    s = SubmodelFields(parse("0"), parse("0"), parse("0"), parse("rho0"), parse("0"), parse("0"))
    res = gas.submodel_residuals(s, a="a", b="b", gamma=1)
    assert res[2] == parse("1/(a*rho0)")


def test_submodel_family2_w():
    s = SubmodelFields(parse("0"), parse("0"), parse("-gamma*t^2/(2*a*rho0)"), parse("rho0/t"), parse("0"), parse("0"))
    assert gas.submodel_residuals(s)[2].is_zero_literal


def test_reduction_report():
    rep = gas.verify_reduction()
    assert rep.ok and rep.summary()["total"] == 7
    y = [e for e in rep.entries if e.subject == "y-momentum"][0]
    assert "V1" in y.detail["reduced"]


# -- symmetries ----------------------------------------------------------------

def test_boost_and_shift_normalize_raw_family():
    raw = build_isochoric_family(v0="v0", w0="w0", S0="S0", normalized=False)
    assert not all_zero(raw)
    h = apply_symmetry(raw, SymmetryTransformation(4, boost=(0, neg(sym("v0")), neg(sym("w0")))))
    h = apply_symmetry(h, SymmetryTransformation(6, P0=sub(neg(f_of(sym("rho0"))), sym("S0"))))
    n = build_isochoric_family()
    for k in ("u", "v", "w", "rho", "P"):
        assert getattr(h, k) == getattr(n, k)
    # S keeps the -f(rho0) from the shift; the normalized form stores it in state_offset instead
    assert sub(h.S, n.S) == neg(f_of(sym("rho0")))
    assert not all_zero(h)


def test_pressure_shift_of_rest_state():
    h = apply_symmetry(gas.rest_state(), SymmetryTransformation(6, P0=Fraction(7, 3)))
    assert h.P == const(Fraction(7, 3)) and not all_zero(h)


def test_dilatation():
    h = apply_symmetry(build_isochoric_family(**FIG), SymmetryTransformation(5, c=2))
    assert not all_zero(h)


@pytest.mark.parametrize("kind", range(1, 7))
@pytest.mark.parametrize("build", [build_isochoric_family, build_blowup_family])
def test_symmetry_closure(kind, build):
    rng = random.Random(kind)
    g = build(a=FIG["a"], b=FIG["b"], rho0=1)
    h = apply_symmetry(g, gas.random_symmetry(kind, rng))
    assert not all_zero(h)


def test_symmetry_validation():
    with pytest.raises(ValueError):
        SymmetryTransformation(5, c=-1)
    with pytest.raises(ValueError):
        SymmetryTransformation(3, rotation=((1, 0, 0), (0, 1, 0), (0, 0, -1)))
    with pytest.raises(ValueError):
        SymmetryTransformation(7)


def test_verify_solution_reports():
    for fam in ("isochoric", "blowup"):
        rep = gas.verify_solution(fam, points=30)
        assert rep.ok, rep.table()
        assert rep.summary()["total"] == 8
    with pytest.raises(ValueError):
        gas.verify_solution("steady")
