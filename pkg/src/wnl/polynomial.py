"""Scalar polynomials on l_p^n built from homogeneous pieces.

A :class:`Polynomial` is a sum of homogeneous components of distinct
degrees, optionally precomposed with a chain of rank-one updates
``y -> a*y + b*g(y)*u``. The chain is stored lazily and applied right to
left, so ``precompose(P, T)`` costs nothing and evaluation costs O(n) per
operator per point.

Every evaluator works on batches: ``Y`` is an ``(m, n)`` complex array and
results are length-``m``. Gradients are holomorphic derivatives, i.e. the
row vector ``dP/dy_i``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import DimensionMismatch, OutOfDomain, OutOfRange, ZeroVector
from .space import INF, Functional, LpSpace, LpVector, _frozen, duality_functional, lp_norm


@dataclass(frozen=True, eq=False)
class Diagonal:
    """x -> sum_i c_i x_i^k."""

    degree: int
    coeffs: np.ndarray
    kind = "diagonal"

    def __post_init__(self):
        if self.degree < 1:
            raise OutOfDomain("diagonal components need degree >= 1; use Constant for k=0")
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))

    def values(self, Z):
        return (Z**self.degree) @ self.coeffs

    def grad(self, Z):
        return self.degree * Z ** (self.degree - 1) * self.coeffs[None, :]

    def scaled(self, c):
        return Diagonal(self.degree, c * self.coeffs)

    def is_zero(self):
        return not np.any(self.coeffs)


@dataclass(frozen=True, eq=False)
class FunctionalPower:
    """x -> scale * f(x)^k."""

    degree: int
    coeffs: np.ndarray
    scale: complex = 1.0
    kind = "functional_power"

    def __post_init__(self):
        if self.degree < 1:
            raise OutOfDomain("functional powers need degree >= 1")
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))
        object.__setattr__(self, "scale", complex(self.scale))

    def values(self, Z):
        return self.scale * (Z @ self.coeffs) ** self.degree

    def grad(self, Z):
        w = self.scale * self.degree * (Z @ self.coeffs) ** (self.degree - 1)
        return w[:, None] * self.coeffs[None, :]

    def scaled(self, c):
        return FunctionalPower(self.degree, self.coeffs, c * self.scale)

    def is_zero(self):
        return self.scale == 0 or not np.any(self.coeffs)


@dataclass(frozen=True, eq=False)
class Constant:
    value: complex
    degree = 0
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    def values(self, Z):
        return np.full(Z.shape[0], self.value, dtype=np.complex128)

    def grad(self, Z):
        return np.zeros_like(Z)

    def scaled(self, c):
        return Constant(c * self.value)

    def is_zero(self):
        return self.value == 0


HomogeneousComponent = Union[Diagonal, FunctionalPower, Constant]


@dataclass(frozen=True, eq=False)
class RankOneUpdateOperator:
    """y -> scale*y + weight*g(y)*direction."""

    scale: float
    direction: np.ndarray
    functional: np.ndarray
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "direction", _frozen(self.direction))
        object.__setattr__(self, "functional", _frozen(self.functional))

    @property
    def dim(self):
        return self.direction.shape[0]

    def apply_rows(self, Y):
        return self.scale * Y + self.weight * (Y @ self.functional)[:, None] * self.direction[None, :]

    def transpose_rows(self, W):
        return self.scale * W + self.weight * (W @ self.direction)[:, None] * self.functional[None, :]

    def __call__(self, y: LpVector) -> LpVector:
        if y.space.dim != self.dim:
            raise DimensionMismatch("operator and vector dimensions differ")
        return LpVector(self.apply_rows(y.coords[None, :])[0], y.space)

    def matrix(self):
        return self.scale * np.eye(self.dim) + self.weight * np.outer(self.direction, self.functional)


def make_projection(x: LpVector) -> RankOneUpdateOperator:
    """Norm-one projection onto span(x) built from the duality map."""
    x.space.require_uniformly_convex()
    nrm = lp_norm(x)
    if nrm == 0:
        raise ZeroVector("cannot project onto the span of 0")
    u = x.coords / nrm
    g = duality_functional(LpVector(u, x.space)).coords
    return RankOneUpdateOperator(0.0, u, g, 1.0)


def make_T(rho: float, x: LpVector) -> RankOneUpdateOperator:
    """(1 - rho) I + rho P_x. ``rho = 0`` gives the identity."""
    if not (0.0 <= rho < 1.0):
        raise OutOfDomain(f"rho must lie in [0, 1), got {rho}")
    P = make_projection(x)
    return RankOneUpdateOperator(1.0 - rho, P.direction, P.functional, rho)


@dataclass(frozen=True, eq=False)
class Polynomial:
    space: LpSpace
    components: tuple
    chain: tuple = ()

    def __post_init__(self):
        comps = tuple(sorted(self.components, key=lambda c: c.degree))
        degs = [c.degree for c in comps]
        if len(set(degs)) != len(degs):
            raise OutOfDomain(f"component degrees must be distinct, got {degs}")
        for c in comps:
            if c.kind != "constant" and c.coeffs.shape[0] != self.space.dim:
                raise DimensionMismatch("component length does not match the space")
        for T in self.chain:
            if T.dim != self.space.dim:
                raise DimensionMismatch("operator length does not match the space")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "chain", tuple(self.chain))

    @property
    def degree(self) -> int:
        nz = [c.degree for c in self.components if not c.is_zero()]
        return max(nz) if nz else 0

    @property
    def degrees(self):
        return [c.degree for c in self.components]

    @property
    def is_homogeneous(self) -> bool:
        return len([c for c in self.components if not c.is_zero()]) <= 1

    @property
    def nonnegative_diagonal(self) -> bool:
        return all(
            c.kind == "constant" and c.value.real >= 0 and c.value.imag == 0
            or c.kind == "diagonal" and np.all(c.coeffs.imag == 0) and np.all(c.coeffs.real >= 0)
            for c in self.components
        )

    @property
    def is_diagonal(self) -> bool:
        return all(c.kind in ("diagonal", "constant") for c in self.components)

    def component(self, k: int):
        for c in self.components:
            if c.degree == k:
                return c
        return None

    def _inner(self, Y):
        Z = np.atleast_2d(np.asarray(Y, dtype=np.complex128))
        if Z.shape[1] != self.space.dim:
            raise DimensionMismatch(f"expected rows of length {self.space.dim}")
        for T in reversed(self.chain):
            Z = T.apply_rows(Z)
        return Z

    def evaluate_rows(self, Y) -> np.ndarray:
        Z = self._inner(Y)
        out = np.zeros(Z.shape[0], dtype=np.complex128)
        for c in self.components:
            out += c.values(Z)
        return out

    def gradient_rows(self, Y) -> np.ndarray:
        Z = self._inner(Y)
        G = np.zeros_like(Z)
        for c in self.components:
            G += c.grad(Z)
        for T in self.chain:
            G = T.transpose_rows(G)
        return G

    def value_and_gradient_rows(self, Y):
        Z = self._inner(Y)
        v = np.zeros(Z.shape[0], dtype=np.complex128)
        G = np.zeros_like(Z)
        for c in self.components:
            v += c.values(Z)
            G += c.grad(Z)
        for T in self.chain:
            G = T.transpose_rows(G)
        return v, G

    def component_rows(self, k: int, Y) -> np.ndarray:
        if not (0 <= k <= self.degree):
            raise OutOfRange(f"degree {k} outside 0..{self.degree}")
        Z = self._inner(Y)
        c = self.component(k)
        if c is None:
            return np.zeros(Z.shape[0], dtype=np.complex128)
        return c.values(Z)

    def __call__(self, y) -> complex:
        return eval_poly(self, y)

    def scaled(self, c: complex) -> "Polynomial":
        return Polynomial(self.space, tuple(comp.scaled(c) for comp in self.components), self.chain)

    def to_dict(self) -> dict:
        return {
            "space": {"n": self.space.dim, "p": _p_out(self.space.p)},
            "components": [_component_to_dict(c) for c in self.components],
            "chain": [
                {
                    "a": T.scale,
                    "b": T.weight,
                    "u": _cplx_out(T.direction),
                    "g": _cplx_out(T.functional),
                }
                for T in self.chain
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Polynomial":
        space = LpSpace(int(d["space"]["n"]), _p_in(d["space"]["p"]))
        comps = [_component_from_dict(c) for c in d["components"]]
        chain = [
            RankOneUpdateOperator(float(t["a"]), _cplx_in(t["u"]), _cplx_in(t["g"]), float(t["b"]))
            for t in d.get("chain", [])
        ]
        return cls(space, tuple(comps), tuple(chain))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return cls.from_dict(json.loads(text))


def eval_poly(P: Polynomial, y) -> complex:
    if isinstance(y, LpVector):
        if y.space != P.space:
            raise DimensionMismatch(f"{y.space} vs {P.space}")
        y = y.coords
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (P.space.dim,):
        raise DimensionMismatch(f"expected a vector of length {P.space.dim}")
    return complex(P.evaluate_rows(y[None, :])[0])


def precompose(P: Polynomial, T: RankOneUpdateOperator) -> Polynomial:
    if T.dim != P.space.dim:
        raise DimensionMismatch("operator and polynomial live on different spaces")
    return Polynomial(P.space, P.components, P.chain + (T,))


def component_eval(P: Polynomial, k: int, y) -> complex:
    if isinstance(y, LpVector):
        y = y.coords
    return complex(P.component_rows(k, np.asarray(y)[None, :])[0])


# builders


def constant(space: LpSpace, c: complex) -> Polynomial:
    return Polynomial(space, (Constant(c),))


def diagonal(space: LpSpace, coeffs_by_degree: dict) -> Polynomial:
    """Polynomial sum_k sum_i c_{k,i} x_i^k; degree 0 entries are scalars."""
    comps = []
    for k, c in coeffs_by_degree.items():
        if k == 0:
            comps.append(Constant(c))
        else:
            comps.append(Diagonal(int(k), np.broadcast_to(np.asarray(c, dtype=complex), (space.dim,))))
    return Polynomial(space, tuple(comps))


def functional_power(f: Functional, N: int, scale: complex = 1.0) -> Polynomial:
    return Polynomial(f.space, (FunctionalPower(N, f.coords, scale),))


def random_diagonal(
    space: LpSpace,
    degree: int,
    rng: np.random.Generator,
    homogeneous: bool = False,
) -> Polynomial:
    """Complex Gaussian coefficients; all degrees 0..N unless ``homogeneous``."""
    degs = [degree] if homogeneous else range(degree + 1)
    coeffs = {}
    for k in degs:
        if k == 0:
            coeffs[0] = complex(rng.standard_normal(), rng.standard_normal())
        else:
            coeffs[k] = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return diagonal(space, coeffs)


# JSON helpers


def _cplx_out(a) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a, dtype=complex).reshape(-1)]


def _cplx_in(pairs: Iterable) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def _p_out(p):
    return "inf" if p == INF else p


def _p_in(p):
    return INF if p in ("inf", "Infinity", math.inf) else float(p)


def _component_to_dict(c) -> dict:
    if c.kind == "constant":
        return {"k": 0, "kind": "constant", "coeffs": _cplx_out([c.value])}
    d = {"k": c.degree, "kind": c.kind, "coeffs": _cplx_out(c.coeffs)}
    if c.kind == "functional_power":
        d["scale"] = _cplx_out([c.scale])[0]
    return d


def _component_from_dict(d: dict):
    kind = d["kind"]
    coeffs = _cplx_in(d["coeffs"])
    if kind == "constant":
        return Constant(coeffs[0])
    if kind == "diagonal":
        return Diagonal(int(d["k"]), coeffs)
    if kind == "functional_power":
        re, im = d.get("scale", [1.0, 0.0])
        return FunctionalPower(int(d["k"]), coeffs, complex(re, im))
    raise OutOfDomain(f"unknown component kind {kind!r}")
