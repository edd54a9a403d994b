import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from hkhydro.pde import (
    StateVec,
    SystemKind,
    TypeTag,
    WrongTypeError,
    characteristic_speed,
    classify,
    classify_states,
    make_general_t,
    make_modified_t0,
    make_nelson,
    make_system,
    quadratic_form,
)

speeds = st.floats(-10, 10, allow_nan=False)


def _sym_discriminants():
    u, v, xi = sp.symbols("u v xi", real=True)
    tables = {
        "nelson": (1, v, 0, u, 0, -u, 1, v),
        "modified": (1, 2 * u + v, 0, u, 0, -u, 1, v),
        "general": (1, 2 * u + v, 0, u, 0, -xi * u, 1, v),
    }
    out = {}
    for name, (A1, B1, C1, D1, A2, B2, C2, D2) in tables.items():
        a = B1 * D2 - B2 * D1
        b = sp.Rational(1, 2) * ((A1 * D2 - A2 * D1) + (B1 * C2 - B2 * C1))
        c = A1 * C2 - A2 * C1
        out[name] = sp.factor(sp.expand(b**2 - a * c))
    return (u, v, xi), out


def test_symbolic_discriminants():
    (u, v, xi), disc = _sym_discriminants()
    assert sp.simplify(disc["nelson"] + u**2) == 0
    assert disc["modified"] == 0
    assert sp.simplify(disc["general"] - u**2 * (1 - xi)) == 0


def test_coefficient_tables_by_hand():
    s = StateVec(0.3, -0.7)
    assert make_nelson().coefficient_table(0, 0, s) == (1, -0.7, 0, 0.3, 0, -0.3, 1, -0.7)
    assert make_modified_t0().coefficient_table(0, 0, s) == pytest.approx((1, -0.1, 0, 0.3, 0, -0.3, 1, -0.7))
    t = make_general_t(2.0).coefficient_table(0, 0, s)
    assert t[5] == pytest.approx(-0.6)


def test_classify_examples():
    cl = classify(make_nelson(), 0, 0, StateVec(0.5, 0.0))
    assert cl.type_tag is TypeTag.ELLIPTIC and cl.discriminant == -0.25 and cl.char_slopes == ()
    cl = classify(make_modified_t0(), 0, 0, StateVec(0.5, 0.0))
    assert cl.type_tag is TypeTag.PARABOLIC and cl.discriminant == 0.0
    assert cl.char_slopes == (0.5,)
    cl = classify(make_nelson(), 0, 0, StateVec(0.0, 1.5))
    assert cl.type_tag is TypeTag.PARABOLIC and cl.char_slopes == (1.5,)


def test_degenerate_tag():
    zero = make_system(SystemKind.NELSON)
    sys = type(zero)(zero.label, lambda t, q, u, v: (0,) * 8, zero.source)
    assert classify(sys, 0, 0, StateVec(1, 1)).type_tag is TypeTag.DEGENERATE


def test_hyperbolic_slopes_solve_the_form():
    # a = 2, b = 1.5, c = 1 -> c s^2 - 2 b s + a has roots 1 and 2
    sys = type(make_nelson())(SystemKind.NELSON, lambda t, q, u, v: (1, 3, 0, 2, 0, -1, 1, 0),
                              lambda t, q, u, v: (0, 0))
    a, b, c = quadratic_form(*sys.coefficient_table(0, 0, StateVec(0, 0)))
    cl = classify(sys, 0, 0, StateVec(0, 0))
    assert cl.type_tag is TypeTag.HYPERBOLIC
    for s in cl.char_slopes:
        assert c * s * s - 2 * b * s + a == pytest.approx(0, abs=1e-12)


@given(u=speeds, v=speeds)
def test_nelson_is_elliptic_off_axis(u, v):
    cl = classify(make_nelson(), 0, 0, StateVec(u, v))
    scale = max(1.0, cl.b * cl.b + abs(cl.a * cl.c))
    assert abs(cl.discriminant + u * u) <= 8 * np.spacing(scale)
    if abs(u) > 1e-5:
        assert cl.type_tag is TypeTag.ELLIPTIC


@given(u=speeds, v=speeds)
def test_modified_speed_is_double_root(u, v):
    s = StateVec(u, v)
    cl = classify(make_modified_t0(), 0, 0, s)
    assert cl.type_tag is TypeTag.PARABOLIC
    assert characteristic_speed(make_modified_t0(), s) == u + v
    assert cl.char_slopes[0] == pytest.approx(u + v, abs=4 * np.spacing(abs(u) + abs(v) + 1))


@given(u=speeds, v=speeds, lam=st.floats(0.1, 10))
def test_row_scaling_preserves_type(u, v, lam):
    base = make_modified_t0()
    scaled_tab = lambda t, q, uu, vv: tuple(lam * x for x in base.coeffs(t, q, uu, vv)[:4]) + tuple(
        base.coeffs(t, q, uu, vv)[4:])
    sys = type(base)(base.label, scaled_tab, base.source)
    s = StateVec(u, v)
    assert classify(sys, 0, 0, s).type_tag is classify(base, 0, 0, s).type_tag


@given(u=speeds, v=speeds)
def test_general_t_at_unit_xi_equals_modified(u, v):
    s = StateVec(u, v)
    assert make_general_t(1.0).coefficient_table(0, 0, s) == make_modified_t0().coefficient_table(0, 0, s)


@given(u=st.floats(0.01, 10), v=speeds, xi=st.floats(1.01, 10))
def test_general_t_is_elliptic_above_unit_xi(u, v, xi):
    cl = classify(make_general_t(xi), 0, 0, StateVec(u, v))
    assert cl.discriminant == pytest.approx(u * u * (1 - xi), rel=1e-12)
    assert cl.type_tag is TypeTag.ELLIPTIC
    with pytest.raises(WrongTypeError):
        characteristic_speed(make_general_t(xi), StateVec(u, v))


def test_general_t_rejects_xi_below_one():
    with pytest.raises(ValueError):
        make_general_t(0.5)


def test_characteristic_speed_rejects_elliptic():
    with pytest.raises(WrongTypeError):
        characteristic_speed(make_nelson(), StateVec(1.0, 0.0))


def test_vectorized_matches_pointwise():
    rng = np.random.default_rng(3)
    u, v = rng.uniform(-10, 10, (2, 200))
    for sys in (make_nelson(), make_modified_t0(), make_general_t(1.7)):
        fc = classify_states(sys, 0.0, np.zeros(200), u, v)
        for k in range(0, 200, 17):
            pt = classify(sys, 0.0, 0.0, StateVec(u[k], v[k]))
            assert fc.at(k) == pt


def test_advection_matrix_with_nonunit_time_block():
    base = make_modified_t0()
    sys = type(base)(base.label, lambda t, q, u, v: tuple(2 * x for x in base.coeffs(t, q, u, v)), base.source)
    y = np.array([[0.4, 0.6], [0.1, -0.2]])
    assert np.allclose(sys.advection_matrix(0, 0, y), base.advection_matrix(0, 0, y))


def test_source_signs():
    grad = lambda q: 2.0 * q
    y = np.array([[0.5], [0.0]])
    q = np.array([1.0])
    assert make_modified_t0(grad).source_term(0, q, y)[1, 0] == pytest.approx(2.0)
    assert make_general_t(1.0, grad).source_term(0, q, y)[1, 0] == pytest.approx(-2.0)
    z = make_general_t(1.0).source_term(0, q, y)
    assert np.all(z == 0) and not np.any(np.signbit(z))
