import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermgeom import dsl
from hermgeom.dsl import BinOp, Func, Neg, Num, Pow, Var
from hermgeom.errors import DimensionError, ParseError
from hermgeom.jets import eval_jet, fd_jet, jet_relative_error

from conftest import random_points, wirtinger_fd


def test_flat_declaration_is_identity():
    mat = dsl.parse_metric("h11 = 1; h22 = 1", 2)
    assert mat == [[Num(1), Num(0)], [Num(0), Num(1)]]


def test_hopf_declaration_matches_closed_form():
    src = "h11 = 4/(z1*conj(z1)+z2*conj(z2)); h22 = 4/(z1*conj(z1)+z2*conj(z2)); h12 = 0"
    field = dsl.load_metric(src, 2)
    pts = random_points(10, 2, scale=2.0, seed=1)
    r2 = np.sum(np.abs(pts) ** 2, axis=-1)
    expect = 4 / r2[:, None, None] * np.eye(2)
    assert np.allclose(field.matrix(pts), expect, rtol=1e-14)


def test_exp_entry_value_and_jet_at_origin():
    mat = dsl.parse_metric("h11 = exp(z1*conj(z1))", 1)
    assert dsl.evaluate(mat[0][0], np.zeros((1, 1)))[0] == 1
    jet = eval_jet(dsl.metric_field_from_exprs(mat), np.zeros((1, 1)))
    assert jet.h[0, 0, 0] == 1
    assert jet.dh[0, 0, 0, 0] == 0
    assert jet.ddh_mixed[0, 0, 0, 0, 0] == 1
    assert jet.ddh_pure[0, 0, 0, 0, 0] == 0


def test_lower_entries_filled_by_conjugation():
    mat = dsl.parse_metric("h11 = 2\nh12 = 0.1*z1\nh22 = 2", 2)
    assert mat[1][0] == BinOp("*", Num(0.1), Var(1, True))


def test_explicit_consistent_lower_entry_accepted():
    dsl.parse_metric("h11 = 2; h22 = 2; h12 = (0.1+0.2i)*z1; h21 = (0.1-0.2i)*conj(z1)", 2)


def test_numerically_equivalent_lower_entry_accepted():
    dsl.parse_metric("h11 = 2; h22 = 2; h12 = 2*z1; h21 = conj(z1)+conj(z1)", 2)


@pytest.mark.parametrize("src, exc, fragment", [
    ("h11 = 1 +", ParseError, "line 1, column 10"),
    ("h11 = 1\nh22 = (z1", ParseError, "line 2, column 10"),
    ("h11 = foo(z1); h22 = 1", ParseError, "unknown variable 'foo'"),
    ("h11 = z3; h22 = 1", DimensionError, "z3"),
    ("h11 = 1", DimensionError, "h22"),
    ("h11 = 1; h33 = 1", DimensionError, "h33"),
    ("h11 = 1; h22 = 1; h12 = z1; h21 = z1", ParseError, "not Hermitian"),
    ("h11 = z1; h22 = 1", ParseError, "not real-valued"),
    ("h11 = 1; h11 = 2; h22 = 1", ParseError, "declared twice"),
    ("h11 1; h22 = 1", ParseError, "assignment"),
    ("h11 = z1^1.5; h22 = 1", ParseError, ""),
])
def test_parse_errors(src, exc, fragment):
    with pytest.raises(exc) as info:
        dsl.parse_metric(src, 2)
    assert fragment in str(info.value)


def test_parse_error_records_position():
    with pytest.raises(ParseError) as info:
        dsl.parse_expr("z1 * * z2", 2)
    assert info.value.position == 5


def test_lexer_forms():
    assert dsl.parse_expr("(1.5-2i)", 1) == Num(1.5 - 2j)
    assert dsl.parse_expr("2i", 1) == Num(2j)
    assert dsl.parse_expr("z1**2", 1) == dsl.parse_expr("z1^2", 1)


# ---------------------------------------------------------------- round trip

def _exprs(n):
    leaves = st.one_of(
        st.integers(1, n).map(Var),
        st.integers(1, n).map(lambda k: Var(k, True)),
        st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False).map(Num),
        st.floats(-50, 50, allow_nan=False).map(Num),
    )

    def extend(children):
        return st.one_of(
            st.builds(BinOp, st.sampled_from("+-*/"), children, children),
            st.builds(Pow, children, st.integers(-3, 4)),
            st.builds(Neg, children),
            st.builds(Func, st.sampled_from(dsl.FUNCTIONS), children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=200)
@given(_exprs(3))
def test_render_parse_round_trip(e):
    assert dsl.parse_expr(dsl.render(e), 3) == e


@given(_exprs(2))
def test_conjugate_is_involution_and_matches_values(e):
    assert dsl.conjugate(dsl.conjugate(e)) == e
    z = random_points(4, 2, scale=0.7, seed=3)
    with np.errstate(all="ignore"):
        a = np.conj(dsl.evaluate(e, z))
        b = dsl.evaluate(dsl.conjugate(e), z)
    ok = np.isfinite(a) & np.isfinite(b) & (np.abs(a) < 1e8)
    # branch cuts of log/sqrt are symmetric under conjugation except on the cut itself
    assert np.allclose(a[ok], b[ok], rtol=1e-9, atol=1e-12)


def test_render_metric_round_trip():
    src = "h11 = 1 + z1*conj(z1); h12 = 0.3*z2; h22 = exp(z2*conj(z2))"
    mat = dsl.parse_metric(src, 2)
    assert dsl.parse_metric(dsl.render_metric(mat), 2) == mat


# ---------------------------------------------------------------- jets vs finite differences

SCALARS = [
    "exp(z1*conj(z2)) + z2^3",
    "log(2 + z1*conj(z1) + z2*conj(z2))",
    "sqrt(3 + z1 - conj(z2)) * (1.5-2i)",
    "1/(1 + z1*conj(z1))^2 - z2^-1",
]


@pytest.mark.parametrize("text", SCALARS)
def test_scalar_jet_matches_finite_differences(text):
    e = dsl.parse_expr(text, 2)
    p = np.array([0.3 + 0.2j, 0.6 - 0.4j])
    jet = dsl.eval_scalar_jet(e, p[None, :])

    def f(q):
        return dsl.evaluate(e, q[None, :])[0]

    def grad(q):
        return dsl.eval_scalar_jet(e, q[None, :]).grad[0]

    d, db = wirtinger_fd(f, p)
    assert np.allclose(jet.grad[0], np.concatenate([d, db]), rtol=1e-8, atol=1e-9)
    # second derivatives: differentiate the exact gradient
    d2, db2 = wirtinger_fd(grad, p)
    hess = np.concatenate([d2, db2], axis=0)
    assert np.allclose(jet.hess[0], hess, rtol=1e-7, atol=1e-8)


def test_metric_jet_matches_fd_jet():
    src = "h11 = 2 + z1*conj(z1); h12 = 0.2*z1*z2 + 0.1*conj(z2); h22 = exp(0.3*z2*conj(z2))"
    field = dsl.load_metric(src, 2)
    p = np.array([0.2 + 0.1j, -0.3 + 0.25j])
    err = jet_relative_error(eval_jet(field, p[None]).take(0), fd_jet(field.matrix, p, step=1e-3))
    assert max(err.values()) < 1e-6


def test_jet_evaluation_is_deterministic():
    field = dsl.load_metric("h11 = 1 + z1*conj(z1); h22 = 1; h12 = 0.1*z1", 2)
    p = random_points(5, 2)
    a, b = eval_jet(field, p), eval_jet(field, p)
    for name in ("h", "dh", "ddh_mixed", "ddh_pure"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
