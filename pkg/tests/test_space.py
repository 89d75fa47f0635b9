import math

import numpy as np
import pytest

from conftest import cvec
from wnl.errors import DimensionMismatch, NotUniformlyConvex, OutOfDomain, ZeroVector
from wnl.space import (
    STANDARD_WEIGHT,
    LpSpace,
    dist_to_span,
    dist_to_span_rows,
    duality_functional,
    lp_norm,
    modulus_of_convexity,
    norm_gradient,
    row_norms,
    weight_eval,
)


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, math.inf])
def test_norm_is_absolutely_homogeneous(p, rng):
    sp = LpSpace(6, p)
    for _ in range(20):
        v = sp.vector(cvec(rng, 6))
        a = complex(*rng.standard_normal(2))
        assert lp_norm(v * a) == pytest.approx(abs(a) * lp_norm(v), rel=1e-12)
    assert lp_norm(sp.zero()) == 0


def test_norm_values_by_hand():
    v = LpSpace(2, 2).vector([3, 4j])
    assert lp_norm(v) == pytest.approx(5)
    assert lp_norm(LpSpace(2, 1).vector([3, 4j])) == pytest.approx(7)
    assert lp_norm(LpSpace(2, math.inf).vector([3, 4j])) == pytest.approx(4)


def test_space_validation():
    with pytest.raises(OutOfDomain):
        LpSpace(0, 2)
    with pytest.raises(OutOfDomain):
        LpSpace(3, 0.5)
    assert LpSpace(3, 3).q == pytest.approx(1.5)
    assert LpSpace(3, 1).q == math.inf
    with pytest.raises(NotUniformlyConvex):
        LpSpace(3, 1).require_uniformly_convex()


@pytest.mark.parametrize("p", [1.5, 2, 3])
def test_duality_functional_norms_x(p, rng):
    sp = LpSpace(5, p)
    for _ in range(20):
        x = sp.vector(cvec(rng, 5))
        f = duality_functional(x)
        assert f(x) == pytest.approx(lp_norm(x), rel=1e-10)
        assert f.dual_norm() == pytest.approx(1, rel=1e-10)
        Y = cvec(rng, 50).reshape(10, 5)
        assert np.all(np.abs(f.apply_rows(Y)) <= row_norms(Y, p) * (1 + 1e-10))


def test_duality_functional_edge_cases():
    f = duality_functional(LpSpace(3, 1).vector([1, 0, -2]))
    assert f.coords[1] == 0
    g = duality_functional(LpSpace(3, math.inf).vector([2, -2, 1]))
    assert np.allclose(g.coords, [1, 0, 0])
    with pytest.raises(ZeroVector):
        duality_functional(LpSpace(3, 2).zero())


@pytest.mark.parametrize("p", [1.5, 2, 3])
def test_dist_to_span(p, rng):
    sp = LpSpace(4, p)
    for _ in range(5):
        x = sp.vector(cvec(rng, 4))
        y = sp.vector(cvec(rng, 4))
        assert dist_to_span(y, x) <= lp_norm(y) + 1e-12
        lam = complex(*rng.standard_normal(2))
        assert dist_to_span(x * lam, x) <= 1e-10


@pytest.mark.parametrize("p", [1.5, 2, 3])
def test_batched_distance_matches_scalar(p, rng):
    sp = LpSpace(4, p)
    x = cvec(rng, 4)
    Y = cvec(rng, 24).reshape(6, 4)
    d, _ = dist_to_span_rows(Y, x, p)
    ref = [dist_to_span(sp.vector(y), sp.vector(x)) for y in Y]
    assert np.allclose(d, ref, rtol=1e-7)


def test_dist_to_span_errors():
    a, b = LpSpace(2, 2), LpSpace(3, 2)
    with pytest.raises(DimensionMismatch):
        dist_to_span(a.vector([1, 0]), b.vector([1, 0, 0]))
    with pytest.raises(ZeroVector):
        dist_to_span(a.vector([1, 0]), a.zero())


@pytest.mark.parametrize("p", [1.5, 2, 3])
def test_norm_gradient_matches_finite_differences(p, rng):
    y = cvec(rng, 4)
    G = norm_gradient(y[None, :], p)[0]
    h = 1e-6
    for j in range(4):
        for unit, comp in ((1, G[j].real), (1j, G[j].imag)):
            e = np.zeros(4, complex)
            e[j] = unit * h
            fd = (row_norms((y + e)[None], p)[0] - row_norms((y - e)[None], p)[0]) / (2 * h)
            assert fd == pytest.approx(comp, abs=1e-6)


def test_modulus_of_convexity_values():
    sp = LpSpace(2, 2)
    # Hilbert space: 1 - sqrt(1 - t^2/4)
    t = np.array([0.0, 0.5, 1.0, 2.0])
    assert np.allclose(modulus_of_convexity(sp, t), 1 - np.sqrt(1 - t * t / 4))
    assert modulus_of_convexity(LpSpace(2, 1.5), 1.0) == pytest.approx(0.5 / 8)
    with pytest.raises(OutOfDomain):
        modulus_of_convexity(sp, 2.5)
    with pytest.raises(NotUniformlyConvex):
        modulus_of_convexity(LpSpace(2, 1), 1.0)


@pytest.mark.parametrize("p", [1.5, 2, 3, 6])
def test_modulus_is_a_lower_bound(p, rng):
    sp = LpSpace(3, p)
    X, Y = sp.random_sphere(rng, 5000), sp.random_sphere(rng, 5000)
    t = np.minimum(row_norms(X - Y, p), 2)
    assert np.all(np.diff(modulus_of_convexity(sp, np.linspace(0, 2, 500))) >= 0)
    assert np.all(modulus_of_convexity(sp, t) <= 1 - row_norms((X + Y) / 2, p) + 1e-8)


def test_small_t_keeps_precision():
    d = modulus_of_convexity(LpSpace(2, 2), 1e-9)
    assert d == pytest.approx(1e-18 / 8, rel=1e-6)


def test_weight():
    assert weight_eval(STANDARD_WEIGHT, 0) == 1
    assert weight_eval(STANDARD_WEIGHT, 1) == 0
    s = np.linspace(0, 1, 1000)
    assert np.all(np.diff([weight_eval(STANDARD_WEIGHT, float(x)) for x in s]) < 0)
    with pytest.raises(OutOfDomain):
        weight_eval(STANDARD_WEIGHT, 1.5)


@pytest.mark.parametrize("p", [1.5, 2, math.inf])
def test_random_points(p, rng):
    sp = LpSpace(5, p)
    assert np.allclose(row_norms(sp.random_sphere(rng, 50, 0.3), p), 0.3)
    assert np.all(row_norms(sp.random_ball(rng, 50), p) < 1)
