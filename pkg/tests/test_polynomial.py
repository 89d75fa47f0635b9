import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cvec
from wnl.constants import M_N
from wnl.errors import DimensionMismatch, OutOfDomain, OutOfRange, ZeroVector
from wnl.polynomial import (
    Polynomial,
    component_eval,
    constant,
    diagonal,
    eval_poly,
    functional_power,
    make_projection,
    make_T,
    precompose,
    random_diagonal,
)
from wnl.space import Functional, LpSpace, lp_norm, modulus_of_convexity, row_norms

ps = st.sampled_from([1.5, 2.0, 3.0, 4.0])
seeds = st.integers(0, 2**32 - 1)


def test_evaluation_by_hand():
    sp = LpSpace(2, 2)
    P = diagonal(sp, {0: 1, 1: [2, 0], 3: [0, 1j]})
    assert eval_poly(P, [1, 2]) == pytest.approx(1 + 2 + 8j)
    assert component_eval(P, 3, [1, 2]) == pytest.approx(8j)
    assert component_eval(P, 2, [1, 2]) == 0
    with pytest.raises(OutOfRange):
        component_eval(P, 4, [1, 2])
    assert P.degree == 3 and not P.is_homogeneous


def test_functional_power_and_constant():
    sp = LpSpace(3, 2)
    f = Functional(np.array([1, 1j, 0]) / math.sqrt(2), sp)
    P = functional_power(f, 3, scale=2)
    y = np.array([1, 2, 5], dtype=complex)
    assert eval_poly(P, y) == pytest.approx(2 * ((1 + 2j) / math.sqrt(2)) ** 3)
    assert eval_poly(constant(sp, 3 - 1j), y) == 3 - 1j
    assert constant(sp, 2).degree == 0


def test_dimension_checks():
    sp = LpSpace(2, 2)
    P = diagonal(sp, {2: [1, 1]})
    with pytest.raises(DimensionMismatch):
        eval_poly(P, [1, 2, 3])
    with pytest.raises(DimensionMismatch):
        precompose(P, make_T(0.1, LpSpace(3, 2).vector([1, 0, 0])))
    with pytest.raises(OutOfDomain):
        Polynomial(sp, diagonal(sp, {2: [1, 1]}).components * 2)


@settings(max_examples=40, deadline=None)
@given(p=ps, seed=seeds, N=st.integers(1, 4), rho=st.floats(0.0, 0.95))
def test_precompose_matches_matrix(p, seed, N, rho):
    rng = np.random.default_rng(seed)
    sp = LpSpace(4, p)
    P = random_diagonal(sp, N, rng)
    x = sp.vector(cvec(rng, 4))
    T = make_T(rho, x)
    Y = cvec(rng, 20).reshape(5, 4) * 0.4
    direct = P.evaluate_rows(Y @ T.matrix().T)
    lazy = precompose(P, T).evaluate_rows(Y)
    assert np.allclose(lazy, direct, rtol=1e-10, atol=1e-12)
    assert precompose(P, T).degree == P.degree


@settings(max_examples=40, deadline=None)
@given(p=ps, seed=seeds, N=st.integers(1, 4))
def test_gradient_matches_finite_differences(p, seed, N):
    rng = np.random.default_rng(seed)
    sp = LpSpace(3, p)
    P = precompose(random_diagonal(sp, N, rng), make_T(0.3, sp.vector(cvec(rng, 3))))
    y = cvec(rng, 3) * 0.3
    G = P.gradient_rows(y[None])[0]
    h = 1e-6
    for j in range(3):
        e = np.zeros(3, complex)
        e[j] = h
        fd = (eval_poly(P, y + e) - eval_poly(P, y - e)) / (2 * h)
        assert fd == pytest.approx(G[j], rel=1e-5, abs=1e-7)


@settings(max_examples=30, deadline=None)
@given(p=ps, seed=seeds, N=st.integers(1, 4))
def test_homogeneity_survives_precompose(p, seed, N):
    rng = np.random.default_rng(seed)
    sp = LpSpace(4, p)
    P = precompose(random_diagonal(sp, N, rng, homogeneous=True), make_T(0.5, sp.vector(cvec(rng, 4))))
    y = cvec(rng, 4) * 0.3
    lam = complex(*rng.standard_normal(2))
    assert eval_poly(P, lam * y) == pytest.approx(lam**N * eval_poly(P, y), rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(p=ps, seed=seeds)
def test_projection_is_idempotent_norm_one(p, seed):
    rng = np.random.default_rng(seed)
    sp = LpSpace(5, p)
    x = sp.vector(cvec(rng, 5))
    Px = make_projection(x)
    Y = cvec(rng, 50).reshape(10, 5)
    A = Px.apply_rows(Y)
    assert np.max(row_norms(Px.apply_rows(A) - A, p)) <= 1e-12 * np.max(row_norms(Y, p))
    assert np.all(row_norms(A, p) <= row_norms(Y, p) * (1 + 1e-12))
    assert np.allclose(Px(x).coords, x.coords)


@settings(max_examples=30, deadline=None)
@given(p=ps, seed=seeds, rho=st.floats(0.01, 0.5))
def test_T_contracts_by_modulus(p, seed, rho):
    rng = np.random.default_rng(seed)
    sp = LpSpace(4, p)
    x = sp.vector(sp.random_ball(rng, 1)[0])
    T = make_T(rho, x)
    Px = make_projection(x)
    Y = sp.random_ball(rng, 200)
    ny = row_norms(Y, p)
    t = np.minimum(2 * rho * row_norms(Y - Px.apply_rows(Y), p), 2)
    assert np.all(row_norms(T.apply_rows(Y), p) <= ny - ny * modulus_of_convexity(sp, t) + 1e-10)
    assert np.allclose(T(x).coords, x.coords)


def test_T_contraction_can_fail_beyond_half():
    # the contraction estimate rests on ||2 rho P_x y + (1 - 2 rho) y|| <= ||y||, which needs rho <= 1/2 off l_2
    rng = np.random.default_rng(0)
    sp = LpSpace(4, 4.0)
    rho = 0.9375
    x = sp.vector(sp.random_ball(rng, 1)[0])
    Px = make_projection(x)
    Y = sp.random_ball(rng, 2000)
    ny = row_norms(Y, 4.0)
    t = np.minimum(2 * rho * row_norms(Y - Px.apply_rows(Y), 4.0), 2)
    excess = row_norms(make_T(rho, x).apply_rows(Y), 4.0) - ny * (1 - modulus_of_convexity(sp, t))
    assert excess.max() > 1e-6


def test_make_T_validation():
    sp = LpSpace(2, 2)
    with pytest.raises(OutOfDomain):
        make_T(1.0, sp.vector([1, 0]))
    with pytest.raises(ZeroVector):
        make_T(0.5, sp.zero())
    assert np.allclose(make_T(0.0, sp.vector([1, 1j])).matrix(), np.eye(2))


def test_lipschitz_bound_on_ball(rng):
    from wnl.norms import OptimizerConfig, v_norm

    sp = LpSpace(4, 2)
    P = random_diagonal(sp, 3, rng)
    v = v_norm(P, OptimizerConfig(restarts=8)).value
    L = v * M_N(3) / 4
    Y, Z = sp.random_ball(rng, 2000), sp.random_ball(rng, 2000)
    assert np.all(np.abs(P.evaluate_rows(Y) - P.evaluate_rows(Z)) <= L * row_norms(Y - Z, 2) + 1e-12)


@settings(max_examples=25, deadline=None)
@given(p=st.sampled_from([1.5, 2.0, math.inf]), seed=seeds, N=st.integers(0, 4))
def test_json_round_trip(p, seed, N):
    rng = np.random.default_rng(seed)
    sp = LpSpace(3, p)
    P = random_diagonal(sp, N, rng)
    if p != math.inf:
        P = precompose(P, make_T(0.2, sp.vector(cvec(rng, 3))))
    R = Polynomial.from_json(P.to_json())
    assert R.to_json() == P.to_json()
    Y = cvec(rng, 12).reshape(4, 3)
    assert np.array_equal(R.evaluate_rows(Y), P.evaluate_rows(Y))


def test_json_keeps_functional_power_scale():
    sp = LpSpace(2, 2)
    P = functional_power(Functional(np.array([1, 0]), sp), 2, scale=4)
    R = Polynomial.from_json(P.to_json())
    assert eval_poly(R, [0.5, 0]) == pytest.approx(1.0)


def test_scaled():
    sp = LpSpace(2, 2)
    P = diagonal(sp, {0: 1, 2: [1, 2]})
    assert eval_poly(P.scaled(3j), [1, 1]) == pytest.approx(3j * eval_poly(P, [1, 1]))
