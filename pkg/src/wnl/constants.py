"""Degree-dependent constants: delta_N, s(alpha, N), s(N), M_N, mu, eta.

Everything is float64. Quantities that sit extremely close to 1 (the radii
s(N) and s(alpha, N) for moderate N) are evaluated through ``log1p``/``expm1``
so that ``1 - s**2`` keeps its relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NonPositiveMax, OutOfDomain
from .space import LpSpace, modulus_of_convexity

N_MAX = 30


def _check_degree(N):
    if int(N) != N or N < 1:
        raise OutOfDomain(f"degree must be a positive integer, got {N}")
    if N > N_MAX:
        raise OutOfDomain(f"degree capped at {N_MAX}, got {N}")
    return int(N)


def _log_n_pow_n_over_fact(n):
    return n * math.log(n) - math.lgamma(n + 1)


def delta_N(N: int) -> float:
    """max over r in [0,1] of r^N - r^(N+2), attained at r = sqrt(N/(N+2))."""
    N = _check_degree(N)
    r2 = N / (N + 2)
    return r2 ** (N / 2) - r2 ** ((N + 2) / 2)


def delta_N_argmax(N: int) -> float:
    N = _check_degree(N)
    return math.sqrt(N / (N + 2))


def _alpha_term(alpha, N):
    # alpha * N! / N^(N+1)
    return alpha * math.exp(math.lgamma(N + 1) - (N + 1) * math.log(N))


def s_alpha_N(alpha: float, N: int) -> float:
    """(1 - alpha N!/N^(N+1))^(1/N)."""
    if not (0.0 < alpha < 1.0):
        raise OutOfDomain(f"alpha must lie in (0, 1), got {alpha}")
    N = _check_degree(N)
    return math.exp(math.log1p(-_alpha_term(alpha, N)) / N)


def one_minus_s_alpha_N_sq(alpha: float, N: int) -> float:
    """1 - s(alpha, N)^2 without cancellation."""
    if not (0.0 < alpha < 1.0):
        raise OutOfDomain(f"alpha must lie in (0, 1), got {alpha}")
    N = _check_degree(N)
    return -math.expm1(2.0 * math.log1p(-_alpha_term(alpha, N)) / N)


def lemma_bracket(s, N: int):
    """1 - sum_{n=1}^N (1 - s^n) n^n / n!, the factor in the s-norm lower bound."""
    s = np.asarray(s, dtype=float)
    u = 1.0 - s
    return _bracket_u(u, N)


def _bracket_u(u, N):
    u = np.asarray(u, dtype=float)
    total = np.zeros_like(u)
    with np.errstate(divide="ignore"):
        lg = np.log1p(-u)
    for n in range(1, N + 1):
        total = total - np.expm1(n * lg) * math.exp(_log_n_pow_n_over_fact(n))
    return 1.0 - total


def _f_u(u, N):
    # f(s) = (1 - s^2) * bracket(s) written in u = 1 - s
    u = np.asarray(u, dtype=float)
    return u * (2.0 - u) * _bracket_u(u, N)


def _maximize(fun, a, b, tol):
    return float(minimize_scalar(lambda t: -fun(t), bounds=(a, b), method="bounded", options={"xatol": tol}).x)


@dataclass(frozen=True)
class SOfN:
    N: int
    s_N: float
    z: float
    f_z: float


@lru_cache(maxsize=None)
def s_of_N_details(N: int) -> SOfN:
    """Radius beyond which the weighted sup of a degree-N polynomial cannot occur.

    Maximizes f(s) = (1 - s^2) * bracket(s) by a grid over both s and
    log10(1 - s) (f is only positive very close to 1 for large N), then refines
    with a bounded Brent search in log10(1 - s). Returns the minimal admissible
    s(N) = sqrt(1 - f(z)), nudged up by 1e-9 (or half the remaining gap to 1,
    whichever is smaller).
    """
    N = _check_degree(N)
    lin = np.linspace(0.0, 1.0, 20001)[1:-1]
    logu = np.linspace(-17.0, 0.0, 20001)[:-1]
    cand_u = np.concatenate([1.0 - lin, 10.0**logu])
    vals = _f_u(cand_u, N)
    j = int(np.argmax(vals))
    if not vals[j] > 0:
        raise NonPositiveMax(f"max of the auxiliary function is not positive for N={N}")
    lu = math.log10(cand_u[j])
    span = 17.0 / 20000 * 2 + abs(lu) * 2e-4 + 1e-3
    lo, hi = lu - span, min(lu + span, 0.0)
    best_lu = _maximize(lambda t: float(_f_u(10.0**t, N)), lo, hi, 1e-10)
    u_star = 10.0**best_lu
    f_z = float(_f_u(u_star, N))
    if f_z < vals[j]:
        u_star, f_z = float(cand_u[j]), float(vals[j])
    if not f_z > 0:
        raise NonPositiveMax(f"max of the auxiliary function is not positive for N={N}")
    z = 1.0 - u_star
    s0 = math.sqrt(1.0 - f_z)
    s_N = s0 + min(1e-9, (1.0 - s0) / 2)
    return SOfN(N, s_N, z, f_z)


def s_of_N(N: int) -> float:
    return s_of_N_details(N).s_N


def M_N(N: int) -> float:
    """8 (1 - s(1/2, N)^2)^(-1) sum_{n=1}^N 2^(2n-1) n^n / n!."""
    N = _check_degree(N)
    total = sum(math.exp((2 * n - 1) * math.log(2) + _log_n_pow_n_over_fact(n)) for n in range(1, N + 1))
    return 8.0 / one_minus_s_alpha_N_sq(0.5, N) * total


def mu(rho, space: LpSpace):
    """rho^2 delta(2 rho^2)^2 / 16 with delta the closed-form convexity bound."""
    space.require_uniformly_convex()
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise OutOfDomain("mu needs rho in [0, 1]")
    d = np.asarray(modulus_of_convexity(space, 2 * r * r))
    out = r * r * d * d / 16.0
    return out.item() if out.ndim == 0 else out


def eta(eps: float, N: int, space: LpSpace) -> float:
    if not (0.0 < eps < 1.0):
        raise OutOfDomain(f"eps must lie in (0, 1), got {eps}")
    return mu(eps / (2.0 * M_N(N)), space)


@dataclass(frozen=True)
class ConstantsRow:
    N: int
    delta_N: float
    s_N: float
    s_half_N: float
    M_N: float


COLUMNS = ("N", "delta_N", "s_N", "s_half_N", "M_N")


@lru_cache(maxsize=None)
def constants_row(N: int) -> ConstantsRow:
    return ConstantsRow(N, delta_N(N), s_of_N(N), s_alpha_N(0.5, N), M_N(N))


def constants_table(N_max: int) -> list:
    _check_degree(N_max)
    return [constants_row(N) for N in range(1, N_max + 1)]
