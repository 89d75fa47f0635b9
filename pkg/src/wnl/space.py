"""Finite-dimensional complex l_p spaces.

Vectors are immutable numpy arrays of complex128 tagged with their space.
Norms, duality maps, distances to complex lines and the modulus of
convexity all live here; the optimizers in :mod:`wnl.norms` use the batched
helpers (``row_norms`` and friends) which act on the rows of an ``(m, n)``
array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotUniformlyConvex,
    OutOfDomain,
    ZeroVector,
)

INF = math.inf


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LpSpace:
    """Complex l_p^n. ``p = math.inf`` encodes the sup norm."""

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise OutOfDomain(f"dim must be a positive integer, got {self.dim}")
        if not (self.p >= 1):
            raise OutOfDomain(f"p must be >= 1, got {self.p}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", float(self.p))

    @property
    def q(self) -> float:
        """Conjugate exponent."""
        if self.p == 1:
            return INF
        if self.p == INF:
            return 1.0
        return self.p / (self.p - 1.0)

    @property
    def uniformly_convex(self) -> bool:
        return 1 < self.p < INF

    def require_uniformly_convex(self):
        if not self.uniformly_convex:
            raise NotUniformlyConvex(f"l_p with p={self.p} is not uniformly convex")

    def vector(self, coords) -> "LpVector":
        return LpVector(coords, self)

    def zero(self) -> "LpVector":
        return LpVector(np.zeros(self.dim), self)

    def basis(self, j: int) -> "LpVector":
        """Canonical basis vector e_j, 0-based index."""
        c = np.zeros(self.dim, dtype=np.complex128)
        c[j] = 1.0
        return LpVector(c, self)

    def in_ball(self, v: "LpVector", closed: bool = False) -> bool:
        r = lp_norm(v)
        return r <= 1.0 if closed else r < 1.0

    def on_sphere(self, v: "LpVector", radius: float = 1.0, tol: float = 1e-12) -> bool:
        return abs(lp_norm(v) - radius) <= tol

    def random_sphere(self, rng: np.random.Generator, m: int, radius: float = 1.0) -> np.ndarray:
        """``m`` seeded points on the sphere of given radius, as an (m, n) array."""
        Z = rng.standard_normal((m, self.dim)) + 1j * rng.standard_normal((m, self.dim))
        return radius * Z / row_norms(Z, self.p)[:, None]

    def random_ball(self, rng: np.random.Generator, m: int, radius: float = 1.0) -> np.ndarray:
        S = self.random_sphere(rng, m)
        t = radius * rng.random(m) ** (1.0 / (2 * self.dim))
        return S * t[:, None]


@dataclass(frozen=True, eq=False)
class LpVector:
    coords: np.ndarray
    space: LpSpace

    def __post_init__(self):
        c = _frozen(self.coords)
        if c.shape[0] != self.space.dim:
            raise DimensionMismatch(f"expected {self.space.dim} coordinates, got {c.shape[0]}")
        object.__setattr__(self, "coords", c)

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __len__(self):
        return self.space.dim

    def __eq__(self, other):
        return (
            isinstance(other, LpVector)
            and self.space == other.space
            and np.array_equal(self.coords, other.coords)
        )

    def __hash__(self):
        return hash((self.space, self.coords.tobytes()))

    def __add__(self, other):
        _same_space(self, other)
        return LpVector(self.coords + other.coords, self.space)

    def __sub__(self, other):
        _same_space(self, other)
        return LpVector(self.coords - other.coords, self.space)

    def __mul__(self, scalar):
        return LpVector(complex(scalar) * self.coords, self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return LpVector(-self.coords, self.space)

    def norm(self) -> float:
        return lp_norm(self)


@dataclass(frozen=True, eq=False)
class Functional:
    """Bounded linear functional on ``space``; acts by sum(coords * x), no conjugation."""

    coords: np.ndarray
    space: LpSpace

    def __post_init__(self):
        c = _frozen(self.coords)
        if c.shape[0] != self.space.dim:
            raise DimensionMismatch(f"expected {self.space.dim} coordinates, got {c.shape[0]}")
        object.__setattr__(self, "coords", c)

    def __call__(self, v) -> complex:
        if isinstance(v, LpVector):
            _same_space(self, v)
            v = v.coords
        return complex(np.dot(self.coords, np.asarray(v)))

    def apply_rows(self, Y: np.ndarray) -> np.ndarray:
        return Y @ self.coords

    def dual_norm(self) -> float:
        return float(row_norms(self.coords[None, :], self.space.q)[0])

    def __mul__(self, scalar):
        return Functional(complex(scalar) * self.coords, self.space)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, Functional)
            and self.space == other.space
            and np.array_equal(self.coords, other.coords)
        )

    def __hash__(self):
        return hash((self.space, self.coords.tobytes()))


@dataclass(frozen=True)
class Weight:
    """Radial weight v(x) = profile(||x||) on the open unit ball."""

    name: str
    profile: Callable[[float], float] = field(compare=False)

    def __call__(self, s):
        return weight_eval(self, s)


STANDARD_WEIGHT = Weight("standard", lambda s: 1.0 - s * s)


def _same_space(a, b):
    if a.space != b.space:
        raise DimensionMismatch(f"{a.space} vs {b.space}")


def row_norms(Y: np.ndarray, p: float) -> np.ndarray:
    """l_p norm of each row of ``Y``."""
    A = np.abs(np.atleast_2d(Y))
    if p == INF:
        return A.max(axis=1)
    if p == 1:
        return A.sum(axis=1)
    if p == 2:
        return np.sqrt(np.einsum("ij,ij->i", A, A))
    # scale first so large exponents do not overflow
    m = A.max(axis=1)
    safe = np.where(m > 0, m, 1.0)
    return m * ((A / safe[:, None]) ** p).sum(axis=1) ** (1.0 / p)


def norm_gradient(Y: np.ndarray, p: float) -> np.ndarray:
    """Euclidean gradient of the l_p norm at each row, complex-packed.

    Real part holds the derivative in Re y_i, imaginary part in Im y_i.
    Rows equal to zero get a zero gradient.
    """
    Y = np.atleast_2d(Y)
    r = row_norms(Y, p)
    safe = np.where(r > 0, r, 1.0)
    A = np.abs(Y)
    if p == 2:
        G = Y / safe[:, None]
    elif p == INF or p == 1:
        # a subgradient; only used by the sampling fallback for flat spheres
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.where(A > 0, Y / np.where(A > 0, A, 1.0), 0)
        if p == 1:
            G = phase
        else:
            G = np.zeros_like(Y)
            idx = A.argmax(axis=1)
            G[np.arange(Y.shape[0]), idx] = phase[np.arange(Y.shape[0]), idx]
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            W = np.where(A > 0, (A / safe[:, None]) ** (p - 2), 0.0)
        G = W * Y / safe[:, None]
    G[r == 0] = 0
    return G


def lp_norm(v) -> float:
    if isinstance(v, LpVector):
        return float(row_norms(v.coords[None, :], v.space.p)[0])
    raise TypeError("lp_norm expects an LpVector")


def duality_functional(x: LpVector) -> Functional:
    """Norming functional f with ||f||_q = 1 and f(x) = ||x||_p.

    For p = 1 zero coordinates get weight 0; for p = inf the first coordinate
    of maximal modulus carries all the mass.
    """
    c = x.coords
    p = x.space.p
    nrm = lp_norm(x)
    if nrm == 0:
        raise ZeroVector("duality functional of the zero vector")
    a = np.abs(c)
    f = np.zeros_like(c)
    nz = a > 0
    if p == 1:
        f[nz] = np.conj(c[nz]) / a[nz]
    elif p == INF:
        j = int(np.argmax(a))
        f[j] = np.conj(c[j]) / a[j]
    else:
        f[nz] = np.conj(c[nz]) * (a[nz] / nrm) ** (p - 2) / nrm
    return Functional(f, x.space)


def _lambda_l2(y: np.ndarray, x: np.ndarray) -> complex:
    return complex(np.vdot(x, y) / np.vdot(x, x))


def dist_to_span(y: LpVector, x: LpVector, tol: float = 1e-12) -> float:
    """min over complex lam of ||y - lam x||_p.

    Closed form for p = 2; otherwise Nelder-Mead over (Re lam, Im lam) from
    eight deterministic starts. The objective is convex in lam.
    """
    _same_space(y, x)
    xc, yc = x.coords, y.coords
    if not np.any(xc):
        raise ZeroVector("span of the zero vector")
    p = x.space.p
    lam0 = _lambda_l2(yc, xc)
    if p == 2:
        return float(np.linalg.norm(yc - lam0 * xc))

    scale = max(abs(lam0), float(np.max(np.abs(yc))) / float(np.max(np.abs(xc))), 1e-300)

    def obj(v):
        lam = complex(v[0], v[1]) * scale
        return float(row_norms((yc - lam * xc)[None, :], p)[0])

    best = None
    base = np.array([lam0.real, lam0.imag]) / scale
    for j in range(8):
        ang = 2 * math.pi * j / 8
        start = base + (0.0 if j == 0 else 0.25) * np.array([math.cos(ang), math.sin(ang)])
        res = minimize(
            obj,
            start,
            method="Nelder-Mead",
            options={"xatol": tol, "fatol": 1e-15, "maxiter": 4000},
        )
        if best is None or res.fun < best.fun:
            best = res
    if not best.success:
        raise NoConvergence("dist_to_span: Nelder-Mead did not reach tolerance", result=best.fun)
    return float(min(best.fun, obj(base)))


def dist_to_span_rows(Y: np.ndarray, x: np.ndarray, p: float, iters: int = 200):
    """Distances of every row of ``Y`` to span(x), plus the optimal multipliers.

    Batched counterpart of :func:`dist_to_span` used inside optimizers. For
    p != 2 it runs Barzilai-Borwein descent on the convex map lam -> ||y - lam x||_p^p.
    """
    Y = np.atleast_2d(Y)
    xx = np.vdot(x, x).real
    if xx == 0:
        raise ZeroVector("span of the zero vector")
    lam = (Y @ np.conj(x)) / xx
    if p == 2:
        return np.linalg.norm(Y - lam[:, None] * x[None, :], axis=1), lam

    def phi_grad(lam):
        R = Y - lam[:, None] * x[None, :]
        A = np.abs(R)
        phi = (A**p).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            W = np.where(A > 0, A ** (p - 2), 0.0)
        g = -p * (W * R * np.conj(x)[None, :]).sum(axis=1)
        return phi, g

    phi, g = phi_grad(lam)
    step = np.full(lam.shape, 1.0 / (p * max(float(np.sum(np.abs(x) ** 2)), 1e-300)))
    for _ in range(iters):
        trial = lam - step * g
        phi_t, g_t = phi_grad(trial)
        ok = phi_t <= phi
        s = np.where(ok, trial - lam, 0)
        yv = np.where(ok, g_t - g, 0)
        lam = np.where(ok, trial, lam)
        phi = np.where(ok, phi_t, phi)
        g = np.where(ok, g_t, g)
        sy = (np.conj(s) * yv).real
        ss = (np.conj(s) * s).real
        bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), step * 2)
        step = np.where(ok, np.clip(bb, 1e-12, 1e12), step * 0.25)
        if np.all(np.abs(s) < 1e-15 * (1 + np.abs(lam))) and np.all(ok):
            break
    R = Y - lam[:, None] * x[None, :]
    return row_norms(R, p), lam


def modulus_of_convexity(space: LpSpace, t) -> float:
    """Closed-form lower bound for the modulus of convexity of l_p.

    p >= 2: 1 - (1 - (t/2)^p)^(1/p) (Clarkson). 1 < p < 2: (p-1) t^2 / 8.
    Works elementwise on arrays.
    """
    space.require_uniformly_convex()
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 2 + 1e-15):
        raise OutOfDomain("modulus of convexity needs t in [0, 2]")
    t = np.clip(t, 0.0, 2.0)
    p = space.p
    if p >= 2:
        # -expm1(log1p(-u)/p) keeps precision for tiny t
        u = (t / 2.0) ** p
        with np.errstate(divide="ignore"):
            out = -np.expm1(np.log1p(-u) / p)
        out = np.where(u >= 1.0, 1.0, out)
    else:
        out = (p - 1.0) * t * t / 8.0
    return out.item() if out.ndim == 0 else out


def weight_eval(w: Weight, s: float) -> float:
    if not (0.0 <= s <= 1.0):
        raise OutOfDomain(f"weight argument must lie in [0, 1], got {s}")
    return float(w.profile(s))
