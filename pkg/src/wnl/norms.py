"""Numerical s-norms, sup-norms and weighted norms of polynomials.

All values returned here are lower bounds on the true suprema: they are
objective values at explicit witness points found by seeded multi-start
projected ascent (see :mod:`wnl._ascent`). The weighted norm is computed
twice, by an outer search over the radius and by a direct ascent in the
ball, and the two are cross-checked.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from . import _ascent
from .constants import lemma_bracket, one_minus_s_alpha_N_sq, s_alpha_N, s_of_N
from .errors import InequalityViolated, NoConvergence, OutOfDomain
from .polynomial import Polynomial
from .space import LpVector, row_norms

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 2000
    step_tol: float = 1e-10
    value_tol: float = 1e-8
    seed: int = 0
    s_grid: int = 257

    def __post_init__(self):
        if self.restarts < 1:
            raise OutOfDomain("restarts must be >= 1")
        if self.max_iters < 1 or self.s_grid < 2:
            raise OutOfDomain("max_iters >= 1 and s_grid >= 2 required")
        if not (self.step_tol > 0 and self.value_tol > 0):
            raise OutOfDomain("tolerances must be positive")

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = OptimizerConfig()


@dataclass(frozen=True, eq=False)
class NormResult:
    value: float
    witness: LpVector
    mode: str  # "s", "sup" or "v"
    s: float | None = None
    s_star: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.diagnostics.get("converged", True)

    def to_dict(self) -> dict:
        w = self.witness.coords
        return {
            "mode": self.mode,
            "value": float(self.value),
            "s": self.s,
            "s_star": self.s_star,
            "witness": [[float(z.real), float(z.imag)] for z in w],
            "diagnostics": self.diagnostics,
        }


class Difference:
    """y -> A(y) - B(y), exposing the same batched protocol as Polynomial."""

    def __init__(self, A, B):
        if A.space != B.space:
            raise OutOfDomain("difference of polynomials on different spaces")
        self.A, self.B, self.space = A, B, A.space

    def evaluate_rows(self, Y):
        return self.A.evaluate_rows(Y) - self.B.evaluate_rows(Y)

    def value_and_gradient_rows(self, Y):
        va, ga = self.A.value_and_gradient_rows(Y)
        vb, gb = self.B.value_and_gradient_rows(Y)
        return va - vb, ga - gb


# start generation


def _directions(obj, cfg, rng, extra=None):
    """Unit-sphere starting directions: warm starts, structured, then random."""
    space = obj.space
    n, p = space.dim, space.p
    blocks = []
    if extra is not None and len(extra):
        E = np.atleast_2d(np.asarray(extra, dtype=np.complex128))
        r = row_norms(E, p)
        E = E[r > 0] / r[r > 0, None]
        blocks.append(E)
    if isinstance(obj, Polynomial) and obj.is_diagonal:
        eye = np.eye(n, dtype=np.complex128)
        blocks += [eye, -eye, np.full((1, n), n ** (-1.0 / p), dtype=np.complex128)]
        if obj.nonnegative_diagonal:
            Z = np.abs(rng.standard_normal((max(cfg.restarts // 4, 1), n))) + 0j
            blocks.append(Z / row_norms(Z, p)[:, None])
    blocks.append(space.random_sphere(rng, cfg.restarts))
    return np.concatenate(blocks, axis=0)


def _rng(cfg, salt=0):
    return np.random.default_rng([int(cfg.seed) & 0xFFFFFFFFFFFFFFFF, salt])


def _finish_s(obj, res, radius, D_rows, mode, cfg):
    vals = res.values
    j = int(np.argmax(vals))  # first maximal index wins ties
    x = res.X[j]
    value = float(abs(obj.evaluate_rows(x[None, :])[0]))
    diag = {
        "iterations": int(res.iterations.max(initial=0)),
        "restarts_used": int(D_rows),
        "best_index": j,
        "best_per_restart": [float(v) for v in vals],
        "converged": bool(res.converged.any()),
    }
    if not res.converged.any():
        diag["flags"] = ["NoConvergence"]
    return NormResult(value, LpVector(x, obj.space), mode, s=float(radius), diagnostics=diag)


def s_norms(obj, radii, cfg: OptimizerConfig = DEFAULT_CONFIG, warm_starts=None, mode="s", strict=False):
    """s-norms for several radii in one batched ascent. Returns a list of NormResult."""
    radii = [float(s) for s in np.atleast_1d(radii)]
    for s in radii:
        if not (0.0 < s <= 1.0):
            raise OutOfDomain(f"s must lie in (0, 1], got {s}")
    D = _directions(obj, cfg, _rng(cfg), warm_starts)
    k = D.shape[0]
    X0 = np.concatenate([s * D for s in radii], axis=0)
    R = np.repeat(radii, k)
    res = _ascent.sphere_ascent(obj, X0, R, obj.space.p, cfg.max_iters, cfg.step_tol)
    out = []
    for i, s in enumerate(radii):
        sl = slice(i * k, (i + 1) * k)
        sub = _ascent.AscentResult(res.X[sl], res.values[sl], res.iterations[sl], res.converged[sl])
        r = _finish_s(obj, sub, s, k, mode, cfg)
        if strict and not r.converged:
            raise NoConvergence(f"no restart converged at s={s}", result=r)
        out.append(r)
    return out


def s_norm(P, s: float, cfg: OptimizerConfig = DEFAULT_CONFIG, warm_starts=None, strict=False) -> NormResult:
    """sup of |P| over the closed ball of radius s, searched on the sphere sS_X."""
    return s_norms(P, [s], cfg, warm_starts, strict=strict)[0]


def sup_norm(P, cfg: OptimizerConfig = DEFAULT_CONFIG, warm_starts=None, strict=False) -> NormResult:
    return s_norms(P, [1.0], cfg, warm_starts, mode="sup", strict=strict)[0]


def weighted_objective(P, x) -> float:
    """(1 - ||x||^2) |P(x)|."""
    x = x.coords if isinstance(x, LpVector) else np.asarray(x)
    r = float(row_norms(x[None, :], P.space.p)[0])
    return (1.0 - r * r) * abs(complex(P.evaluate_rows(x[None, :])[0]))


def _refine(h, a, b, tol):
    """Bounded Brent search (golden section with parabolic steps) for max h on [a, b]."""
    if b - a <= tol:
        return 0.5 * (a + b)
    return float(minimize_scalar(lambda t: -h(t), bounds=(a, b), method="bounded", options={"xatol": tol}).x)


def _v_outer(P, cfg, s_max, warm_starts):
    """Grid over s in [0, s_max] plus bounded Brent refinement of (1-s^2)||P||_s."""
    space = P.space
    p = space.p
    grid = np.linspace(0.0, s_max, cfg.s_grid)
    pos = grid[1:]
    D = _directions(P, cfg, _rng(cfg), warm_starts)
    k = D.shape[0]
    X0 = (pos[:, None, None] * D[None, :, :]).reshape(-1, space.dim)
    res = _ascent.sphere_ascent(P, X0, np.repeat(pos, k), p, cfg.max_iters, cfg.step_tol)
    vals = res.values.reshape(len(pos), k)
    best_j = vals.argmax(axis=1)
    h = np.empty(len(grid))
    h[0] = abs(complex(P.evaluate_rows(np.zeros((1, space.dim)))[0]))
    h[1:] = (1.0 - pos**2) * vals.max(axis=1)
    j = int(np.argmax(h))
    Xg = res.X.reshape(len(pos), k, space.dim)
    iters = int(res.iterations.max(initial=0))

    def witness_at(i):
        return np.zeros(space.dim, dtype=np.complex128) if i == 0 else Xg[i - 1, best_j[i - 1]]

    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    neigh = [witness_at(i) for i in range(max(j - 1, 1), min(j + 1, len(grid) - 1) + 1)]
    rng = _rng(cfg, 1)
    seeds = np.concatenate([np.array(neigh).reshape(-1, space.dim), space.random_sphere(rng, 2)])
    seeds = seeds[row_norms(seeds, p) > 0]
    seeds = seeds / row_norms(seeds, p)[:, None]
    memo = {}

    def h_of(s):
        if s <= 0:
            return h[0]
        if s not in memo:
            r = _ascent.sphere_ascent(P, s * seeds, np.full(len(seeds), s), p, cfg.max_iters, cfg.step_tol)
            i = int(np.argmax(r.values))
            memo[s] = ((1.0 - s * s) * r.values[i], r.X[i])
        return memo[s][0]

    # value error is quadratic in the s error, and _polish refines the position afterwards
    s_best = _refine(h_of, lo, hi, 1e-9)
    if s_best > 0 and h_of(s_best) >= h[j]:
        x = memo[s_best][1]
    else:
        x = witness_at(j)
    flags = []
    if j == len(grid) - 1:
        flags.append("EndpointArgmax")
        log.warning("v-norm outer argmax hit the endpoint s=%.12g", s_max)
    if not res.converged.any():
        flags.append("NoConvergence")
    return x, {"grid_argmax": float(grid[j]), "grid_value": float(h[j]), "outer_iterations": iters, "flags": flags}


def _polish(P, x, cfg):
    """Direct ball ascent from x; positional accuracy beyond what the 1-D search gives."""
    if not np.any(x):
        return x
    r = _ascent.ball_ascent(P, x[None, :], P.space.p, cfg.max_iters, cfg.step_tol)
    return r.X[0] if r.values[0] >= weighted_objective(P, x) else x


def _v_direct(P, cfg, s_max):
    space = P.space
    rng = _rng(cfg, 2)
    D = space.random_sphere(rng, cfg.restarts)
    radii = s_max * (0.05 + 0.9 * rng.random(cfg.restarts))
    X0 = [D * radii[:, None]]
    if P.is_diagonal:
        N = max(P.degree, 1)
        r0 = np.sqrt(N / (N + 2.0))
        eye = np.eye(space.dim, dtype=np.complex128)
        X0 += [r0 * eye, -r0 * eye]
    X0 = np.concatenate(X0)
    res = _ascent.ball_ascent(P, X0, space.p, cfg.max_iters, cfg.step_tol)
    i = int(np.argmax(res.values))
    return res.X[i], float(res.values[i])


def v_norm(P, cfg: OptimizerConfig = DEFAULT_CONFIG, s_max=None, warm_starts=None) -> NormResult:
    """Weighted norm sup (1 - ||x||^2)|P(x)| with an interior witness.

    Method (a): outer search over s in [0, s_max] (default s(N)) of
    (1 - s^2) ||P||_s, grid then bounded Brent refinement, then a local ball ascent
    from the winner. Method (b): direct multi-start ascent in the ball. The
    result is method (a); a gap above 1e-6 max(1, a) adds the flag
    ``MethodMismatch``.
    """
    space = P.space
    N = P.degree
    if N == 0:
        x = np.zeros(space.dim, dtype=np.complex128)
        val = abs(complex(P.evaluate_rows(x[None, :])[0]))
        return NormResult(val, LpVector(x, space), "v", s_star=0.0, diagnostics={"method_b": val, "flags": []})
    if s_max is None:
        s_max = s_of_N(N)
    x_a, diag = _v_outer(P, cfg, float(s_max), warm_starts)
    x_a = _polish(P, x_a, cfg)
    if warm_starts is not None:
        # warm starts (e.g. the previous iterate of an outer algorithm) get their own local ascent
        W = np.atleast_2d(np.asarray(warm_starts, dtype=np.complex128))
        for w in W:
            xw = _polish(P, w, cfg)
            if weighted_objective(P, xw) > weighted_objective(P, x_a):
                x_a = xw
    a = weighted_objective(P, x_a)
    x_b, b = _v_direct(P, cfg, float(s_max))
    diag["method_b"] = b
    diag["method_b_witness"] = [[float(z.real), float(z.imag)] for z in x_b]
    if abs(a - b) > 1e-6 * max(1.0, a):
        diag["flags"].append("MethodMismatch")
        log.warning("v-norm methods disagree: outer %.12g vs direct %.12g", a, b)
    s_star = float(row_norms(x_a[None, :], space.p)[0])
    return NormResult(a, LpVector(x_a, space), "v", s_star=s_star, diagnostics=diag)


def best_known_v(result: NormResult) -> float:
    return max(result.value, result.diagnostics.get("method_b", result.value))


def attainment_witness(P, result: NormResult | None = None, cfg: OptimizerConfig = DEFAULT_CONFIG):
    """(s_star, witness, margin) with margin = ||P||_v - (1 - ||x||^2)|P(x)|.

    ``||P||_v`` is the best value either v-norm method found.
    """
    if result is None:
        result = v_norm(P, cfg)
    margin = best_known_v(result) - weighted_objective(P, result.witness)
    return result.s_star, result.witness, float(margin)


def sup_distance(A, B, cfg: OptimizerConfig = DEFAULT_CONFIG, samples: int = 10_000, radius: float = 1.0) -> float:
    """Estimate sup_{||y|| <= radius} |A(y) - B(y)| by sphere sampling plus ascent."""
    D = Difference(A, B)
    rng = _rng(cfg, 3)
    S = A.space.random_sphere(rng, samples, radius)
    vals = np.abs(D.evaluate_rows(S))
    top = S[np.argsort(vals)[::-1][: max(cfg.restarts // 4, 4)]]
    res = _ascent.sphere_ascent(D, top, np.full(len(top), radius), A.space.p, cfg.max_iters, cfg.step_tol)
    return float(max(vals.max(), res.values.max()))


# norm inequalities


def check_lower_bound_lemma(P, s, cfg: OptimizerConfig = DEFAULT_CONFIG, sup: NormResult | None = None, slack=1e-8, raise_on_fail=True):
    """||P||_s >= (1 - sum_{n<=N} (1 - s^n) n^n/n!) ||P||_inf for each s in the grid."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any((s <= 0) | (s >= 1)):
        raise OutOfDomain("s must lie in (0, 1)")
    N = max(P.degree, 1)
    if sup is None:
        sup = sup_norm(P, cfg)
    lhs = np.array([r.value for r in s_norms(P, s, cfg, warm_starts=sup.witness.coords[None, :])])
    rhs = lemma_bracket(s, N) * sup.value
    ok = lhs >= rhs - slack
    report = {
        "s": s.tolist(),
        "lhs": lhs.tolist(),
        "rhs": rhs.tolist(),
        "sup_norm": sup.value,
        "holds": bool(ok.all()),
        "min_slack": float((lhs - rhs).min()),
    }
    if raise_on_fail and not ok.all():
        raise InequalityViolated("s-norm lower bound violated", report)
    return report


def check_equivalence(P, alpha, cfg: OptimizerConfig = DEFAULT_CONFIG, sup: NormResult | None = None, v: NormResult | None = None, slack=1e-8, raise_on_fail=True):
    """(1) ||P||_{s(a,N)} >= (1-a)||P||_inf and (2) ||P||_v >= (1 - s(a,N)^2)(1-a)||P||_inf."""
    alphas = np.atleast_1d(np.asarray(alpha, dtype=float))
    N = max(P.degree, 1)
    if sup is None:
        sup = sup_norm(P, cfg)
    if v is None:
        v = v_norm(P, cfg)
    radii = [s_alpha_N(a, N) for a in alphas]
    s_vals = np.array([r.value for r in s_norms(P, radii, cfg, warm_starts=sup.witness.coords[None, :])])
    rhs1 = (1 - alphas) * sup.value
    rhs2 = np.array([one_minus_s_alpha_N_sq(a, N) for a in alphas]) * rhs1
    ok1 = s_vals >= rhs1 - slack
    ok2 = v.value >= rhs2 - slack
    report = {
        "alpha": alphas.tolist(),
        "s_alpha_N": radii,
        "s_norm": s_vals.tolist(),
        "sup_norm": sup.value,
        "v_norm": v.value,
        "rhs1": rhs1.tolist(),
        "rhs2": rhs2.tolist(),
        "min_slack": float(min((s_vals - rhs1).min(), (v.value - rhs2).min())),
        "holds": bool(ok1.all() and ok2.all()),
    }
    if raise_on_fail and not report["holds"]:
        raise InequalityViolated("norm equivalence violated", report)
    return report
