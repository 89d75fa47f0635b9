"""Constructive norm-attainment: move a near-attaining pair to an attaining one.

Starting from P with ||P||_v = 1 and a point x where P nearly attains, the
algorithm precomposes with the contractions T_{rho_n, x_n} = (1 - rho_n) I +
rho_n P_{x_n}, which squash the ball towards span(x_n), and re-picks a
near-attaining point after each step. The limit Q attains its weighted norm
at a point y close to span(x), with ||P - Q||_inf <= eps.

Theoretical constants make rho_n microscopic, so a Practical schedule swaps
M_N for a measured Lipschitz bound and mu for max(mu, kappa rho^2). Every
guarantee is re-checked numerically on the output in both modes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _ascent
from .constants import M_N, mu as mu_faithful
from .errors import (
    GuaranteeFailed,
    HypothesisViolated,
    MonitorViolation,
    NoConvergence,
    OutOfDomain,
    ZeroPolynomial,
)
from .norms import (
    DEFAULT_CONFIG,
    OptimizerConfig,
    _rng,
    best_known_v,
    sup_distance,
    v_norm,
    weighted_objective,
)
from .polynomial import Polynomial, RankOneUpdateOperator, make_T, precompose
from .space import LpSpace, LpVector, dist_to_span, dist_to_span_rows, modulus_of_convexity, norm_gradient, row_norms

log = logging.getLogger(__name__)

FAITHFUL = "faithful"
PRACTICAL = "practical"

# Slacks of order mu(rho) sit far below double precision in faithful mode;
# comparisons against them get this absolute floor.
FLOAT_FLOOR = 1e-10
ZERO_POINT = 1e-12
# localization checks need rho^2 well above double-precision rounding of ||S||_v
RESOLUTION = 1e4 * np.finfo(float).eps


@dataclass(frozen=True)
class Schedule:
    """Radii rho_1 = eps/(2M), rho_n = mu(rho_1)/(2^n M), cut at ``rho_tol``."""

    eps: float
    mode: str
    M: float
    space: LpSpace
    kappa: float = 0.0
    max_iters: int = 60
    rho_tol: float = 1e-10
    rho: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise OutOfDomain(f"eps must lie in (0, 1), got {self.eps}")
        if self.mode not in (FAITHFUL, PRACTICAL):
            raise OutOfDomain(f"unknown mode {self.mode!r}")
        if not (self.M > 0 and math.isfinite(self.M)):
            raise OutOfDomain("M must be positive and finite")
        self.space.require_uniformly_convex()
        rho = []
        n = 1
        while n <= self.max_iters:
            r = self.rho_at(n)
            if r <= self.rho_tol:
                break
            rho.append(r)
            n += 1
        object.__setattr__(self, "rho", tuple(rho))
        total = self.M * sum(rho)
        tail = self.M * sum(rho[1:])
        if total > self.eps * (1 + 1e-12) or tail > self.mu(self.rho_at(1)) * (1 + 1e-12):
            raise OutOfDomain("schedule violates its summability bounds")

    @classmethod
    def faithful(cls, eps, N, space, **kw):
        return cls(eps, FAITHFUL, M_N(N), space, **kw)

    @classmethod
    def practical(cls, eps, M, space, kappa=1e-3, **kw):
        return cls(eps, PRACTICAL, M, space, kappa=kappa, **kw)

    def mu(self, rho):
        m = mu_faithful(min(rho, 1.0), self.space)
        if self.mode == PRACTICAL:
            m = max(m, self.kappa * rho * rho)
        return m

    def rho_at(self, n: int) -> float:
        r1 = self.eps / (2 * self.M)
        if n == 1:
            return r1
        return self.mu(r1) / (2**n * self.M)

    def eta(self) -> float:
        return self.mu(self.rho_at(1))

    def to_dict(self):
        return {
            "eps": self.eps,
            "mode": self.mode,
            "M": self.M,
            "kappa": self.kappa,
            "rho": list(self.rho),
            "eta": self.eta(),
        }


class LocalizationResult(NamedTuple):
    """``holds`` is None when rho is too small for the comparison to be resolved in float64."""

    holds: bool | None
    lhs: float
    rhs: float


@dataclass
class IterationRecord:
    n: int
    rho: float
    x: np.ndarray
    v_norm: float
    margin: float
    slack: float
    localization: LocalizationResult | None
    dist_next: float
    sup_drift: float
    drift_bound: float
    telescoping: float
    telescoping_bound: float
    contraction_excess: float
    selection: str

    def checks(self, mode):
        c = {
            "dist": self.dist_next <= self.rho,
            "drift": self.sup_drift <= self.drift_bound + FLOAT_FLOOR,
            "contraction": self.contraction_excess <= FLOAT_FLOOR,
            "telescoping": self.telescoping <= self.telescoping_bound + FLOAT_FLOOR,
            "v_bounds": 0.5 < self.v_norm < 2.0,
            # unresolved checks (holds is None) are flagged on the trace, not counted as failures
            "localization": self.localization is None or self.localization.holds is not False,
        }
        return c

    def to_dict(self, mode):
        loc = self.localization
        return {
            "n": self.n,
            "rho": self.rho,
            "x": [[float(z.real), float(z.imag)] for z in self.x],
            "v_norm": self.v_norm,
            "margin": self.margin,
            "slack": self.slack,
            "localization": None if loc is None else {"holds": loc.holds, "lhs": loc.lhs, "rhs": loc.rhs},
            "dist_next": self.dist_next,
            "sup_drift": self.sup_drift,
            "drift_bound": self.drift_bound,
            "telescoping": self.telescoping,
            "telescoping_bound": self.telescoping_bound,
            "contraction_excess": self.contraction_excess,
            "selection": self.selection,
            "checks": self.checks(mode),
        }


@dataclass
class BollobasTrace:
    schedule: Schedule
    x0: np.ndarray
    records: list = field(default_factory=list)
    points: list = field(default_factory=list)  # x_1, x_2, ...
    Q: Polynomial | None = None
    y: np.ndarray | None = None
    sup_PQ: float = math.nan
    dist_y: float = math.nan
    dist_y_x1: float = math.nan
    attainment_margin: float = math.nan
    flags: list = field(default_factory=list)

    @property
    def guarantees(self):
        eps = self.schedule.eps
        return {
            "sup_PQ": self.sup_PQ <= eps,
            "dist_y": self.dist_y <= eps,
            "attainment": self.attainment_margin <= 1e-6,
        }

    @property
    def invariants_ok(self):
        return all(all(r.checks(self.schedule.mode).values()) for r in self.records)

    @property
    def ok(self):
        return all(self.guarantees.values()) and self.invariants_ok

    def verdict(self):
        return {
            "kind": "verdict",
            "schedule": self.schedule.to_dict(),
            "iterations": len(self.records),
            "sup_PQ": self.sup_PQ,
            "dist_y_span_x": self.dist_y,
            "dist_y_span_x1": self.dist_y_x1,
            "attainment_margin": self.attainment_margin,
            "y": None if self.y is None else [[float(z.real), float(z.imag)] for z in self.y],
            "guarantees": self.guarantees,
            "invariants_ok": self.invariants_ok,
            "flags": list(self.flags),
            "passed": self.ok,
        }

    def json_records(self):
        out = [dict(kind="iteration", **r.to_dict(self.schedule.mode)) for r in self.records]
        return out + [self.verdict()]


# helpers


def _vec(x, space):
    return LpVector(np.asarray(getattr(x, "coords", x), dtype=np.complex128), space)


def _T(rho, x: LpVector) -> RankOneUpdateOperator:
    # the projection onto span(0) is 0, so T degenerates to a dilation
    if lp_norm_arr(x.coords, x.space.p) < ZERO_POINT:
        z = np.zeros(x.space.dim, dtype=np.complex128)
        return RankOneUpdateOperator(1.0 - rho, z, z, 0.0)
    return make_T(rho, x)


def lp_norm_arr(c, p):
    return float(row_norms(np.asarray(c)[None, :], p)[0])


def _dist(y, x, space):
    if lp_norm_arr(x, space.p) < ZERO_POINT:
        return lp_norm_arr(y, space.p)
    return dist_to_span(_vec(y, space), _vec(x, space))


def normalize_v_with_result(P: Polynomial, cfg: OptimizerConfig = DEFAULT_CONFIG):
    """(P / ||P||_v, v-norm result of P)."""
    res = v_norm(P, cfg)
    v = best_known_v(res)
    if not v > 0:
        raise ZeroPolynomial("weighted norm is zero")
    return P.scaled(1.0 / v), res


def normalize_v(P: Polynomial, cfg: OptimizerConfig = DEFAULT_CONFIG) -> Polynomial:
    return normalize_v_with_result(P, cfg)[0]


def lipschitz_estimate(P: Polynomial, cfg: OptimizerConfig = DEFAULT_CONFIG, samples: int = 4000) -> float:
    """max ||dP(y)||_q over sampled unit-sphere points (the sup over the ball sits there)."""
    space = P.space
    rng = _rng(cfg, 11)
    Y = np.concatenate(
        [space.random_sphere(rng, samples), np.eye(space.dim), -np.eye(space.dim), 1j * np.eye(space.dim)]
    ).astype(np.complex128)
    Y = Y / row_norms(Y, space.p)[:, None]
    D = P.gradient_rows(Y)
    return float(row_norms(D, space.q).max())


def practical_M(P: Polynomial, cfg: OptimizerConfig = DEFAULT_CONFIG, v: float | None = None, safety: float = 2.0) -> float:
    """M with rho ||P||_v M / 2 >= 2 rho Lip(P), times a safety factor."""
    if v is None:
        v = best_known_v(v_norm(P, cfg))
    return safety * 4.0 * lipschitz_estimate(P, cfg) / v


def contraction_excess(T: RankOneUpdateOperator, space: LpSpace, rho: float, Y: np.ndarray) -> float:
    """max over rows of ||T y|| - ||y|| (1 - delta(2 rho ||y - P_x y||))."""
    p = space.p
    TY = T.apply_rows(Y)
    PY = (Y @ T.functional)[:, None] * T.direction[None, :]
    ny = row_norms(Y, p)
    t = np.minimum(2 * rho * row_norms(Y - PY, p), 2.0)
    bound = ny * (1 - np.asarray(modulus_of_convexity(space, t)))
    return float(np.max(row_norms(TY, p) - bound))


# localization


def localization_check(
    S: Polynomial,
    x,
    rho: float,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    mu_fn=None,
    v: float | None = None,
    strict: bool = False,
    M: float | None = None,
) -> LocalizationResult:
    """Is sup over B minus [x]_rho of (1-||y||^2)|S(y)| below ||S||_v - mu(rho)?

    The constrained sup is a penalty method: maximize F - w max(0, rho - d)^2
    with w ramped by 10 over five rounds, then push each end point radially
    away from span(x) until d >= rho and take the best F there.
    """
    space = S.space
    p = space.p
    xc = np.asarray(getattr(x, "coords", x), dtype=np.complex128)
    if mu_fn is None:
        mu_fn = lambda r: mu_faithful(r, space)  # noqa: E731
    if v is None:
        v = best_known_v(v_norm(S, cfg))
    if strict:
        if not (0.5 <= v <= 2.0):
            raise HypothesisViolated(f"||S||_v = {v} outside [1/2, 2]")
        if M is not None and not rho < 1 / (16 * M):
            raise HypothesisViolated(f"rho = {rho} not below 1/(16 M)")
    elif not (0.5 <= v <= 2.0):
        log.info("localization check outside its hypothesis: ||S||_v = %g", v)
    if rho == 0:
        return LocalizationResult(False, float(v), float(v))
    rhs = v - mu_fn(rho)
    if rho * rho < RESOLUTION * max(v, 1.0):
        # both the mu slack and the O(rho^2) drop of F across the tube are below rounding
        return LocalizationResult(None, float(v), float(rhs))
    if lp_norm_arr(xc, p) < ZERO_POINT:
        # [0]_rho is the rho-ball; its complement is handled by the radius constraint
        def dfun(Y):
            d = row_norms(Y, p)
            return d, np.zeros(len(Y), dtype=np.complex128), norm_gradient(Y, p)
    else:
        def dfun(Y):
            d, lam = dist_to_span_rows(Y, xc, p)
            return d, lam, norm_gradient(Y - lam[:, None] * xc[None, :], p)

    rng = _rng(cfg, 17)
    m = cfg.restarts
    W = space.random_sphere(rng, m)
    starts = [xc[None, :] + 1.5 * rho * W, space.random_ball(rng, m, 0.999)]
    X0 = np.concatenate(starts)
    for w in (10.0, 1e2, 1e3, 1e4, 1e5):

        def evaluate(X, idx, w=w):
            F, G = _ascent.weighted_value_grad(S, X, p)
            d, _, gd = dfun(X)
            gap = np.maximum(rho - d, 0.0)
            return F - w * gap * gap, G + (2 * w * gap)[:, None] * gd

        res = _ascent.ball_ascent_real(evaluate, X0, cfg.max_iters, cfg.step_tol)
        X0 = res.X
    Y = X0.copy()
    for _ in range(5):
        d, lam, _ = dfun(Y)
        if np.all(d >= rho):
            break
        base = lam[:, None] * (xc[None, :] if lp_norm_arr(xc, p) >= ZERO_POINT else 0.0)
        f = np.where(d > 0, np.maximum(1.0, rho / np.where(d > 0, d, 1.0)), 1.0)
        Y = base + (Y - base) * f[:, None]
        # rows sitting exactly on the span have no direction to push along
        flat = d == 0
        if np.any(flat):
            Y[flat] = Y[flat] + rho * space.random_sphere(rng, int(flat.sum()))
    d, _, _ = dfun(Y)
    feasible = d >= rho * (1 - 1e-9)
    F = np.abs(S.evaluate_rows(Y)) * (1 - row_norms(Y, p) ** 2)
    lhs = float(F[feasible].max()) if np.any(feasible) else -math.inf
    return LocalizationResult(bool(lhs < rhs), lhs, float(rhs))


# main algorithm


def _select_next(Pn1, x_n, rho_n, slack, cfg, space):
    """Optimizer witness if it near-attains inside [x_n]_rho_n, else x_n itself."""
    for attempt, c in enumerate((cfg, cfg.with_(restarts=4 * cfg.restarts))):
        res = v_norm(Pn1, c, warm_starts=x_n[None, :])
        best = best_known_v(res)
        cands = [("witness", res.witness.coords), ("previous", x_n)]
        for name, y in cands:
            margin = best - weighted_objective(Pn1, y)
            d = _dist(y, x_n, space)
            if margin <= slack and d <= rho_n:
                tag = name if attempt == 0 else name + "_retry"
                return np.array(y), best, margin, d, tag
    raise NoConvergence(f"no near-attaining point within slack {slack:g} inside [x_n]_rho", res)


def check_hypotheses(P, x, schedule: Schedule, cfg: OptimizerConfig = DEFAULT_CONFIG, v: float | None = None):
    if v is None:
        v = best_known_v(v_norm(P, cfg))
    if abs(v - 1.0) > 1e-6:
        raise HypothesisViolated(f"||P||_v = {v}, expected 1")
    margin = 1.0 - weighted_objective(P, x)
    eta = schedule.eta()
    if margin > eta + FLOAT_FLOOR:
        raise HypothesisViolated(f"near-attainment margin {margin:g} exceeds eta = {eta:g}")
    if schedule.mode == FAITHFUL and not schedule.eps < 1 / 16:
        raise HypothesisViolated("faithful mode needs eps < 1/16")
    return v, margin


def make_schedule(P, eps, mode, cfg: OptimizerConfig = DEFAULT_CONFIG, v=None, kappa=1e-3, max_iters=60, rho_tol=None):
    rho_tol = cfg.step_tol if rho_tol is None else rho_tol
    if mode == FAITHFUL:
        return Schedule.faithful(eps, P.degree, P.space, max_iters=max_iters, rho_tol=rho_tol)
    if mode == PRACTICAL:
        M = practical_M(P, cfg, v)
        return Schedule.practical(eps, M, P.space, kappa=kappa, max_iters=max_iters, rho_tol=rho_tol)
    raise OutOfDomain(f"unknown mode {mode!r}")


def bollobas_correct(
    P: Polynomial,
    x,
    eps: float,
    mode: str = PRACTICAL,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    schedule: Schedule | None = None,
    check_localization: bool = True,
    drift_samples: int = 4000,
):
    """Returns (Q, y, trace). Raises GuaranteeFailed (trace attached) if a final check fails."""
    space = P.space
    space.require_uniformly_convex()
    if P.degree < 1:
        raise OutOfDomain("need a polynomial of degree >= 1")
    x = np.asarray(getattr(x, "coords", x), dtype=np.complex128)
    v0 = best_known_v(v_norm(P, cfg, warm_starts=x[None, :]))
    if schedule is None:
        schedule = make_schedule(P, eps, mode, cfg, v=v0)
    check_hypotheses(P, x, schedule, cfg, v=v0)
    trace = BollobasTrace(schedule, x.copy())
    trace.points.append(x.copy())
    rng = _rng(cfg, 23)
    Pn, xn, vn = P, x, v0
    cum = 0.0
    drift_cfg = cfg.with_(restarts=max(cfg.restarts // 2, 8))
    for n, rho_n in enumerate(schedule.rho, start=1):
        T = _T(rho_n, _vec(xn, space))
        Pn1 = precompose(Pn, T)
        slack = max(schedule.mu(schedule.rho_at(n + 1)), FLOAT_FLOOR)
        xn1, vn1, margin, d, tag = _select_next(Pn1, xn, rho_n, slack, cfg, space)
        if tag != "witness":
            trace.flags.append(f"n={n}:{tag}")
        loc = None
        if check_localization:
            loc = localization_check(Pn1, xn, rho_n, cfg, mu_fn=schedule.mu, v=vn1, M=schedule.M)
            if loc.holds is None:
                trace.flags.append(f"n={n}:localization_unresolved")
        drift = sup_distance(Pn, Pn1, drift_cfg, samples=drift_samples)
        tele = sup_distance(P, Pn1, drift_cfg, samples=drift_samples)
        cum += schedule.M * rho_n
        Yt = np.concatenate([space.random_ball(rng, 512), xn[None, :]])
        trace.records.append(
            IterationRecord(
                n=n,
                rho=rho_n,
                x=xn.copy(),
                v_norm=vn,
                margin=float(vn - weighted_objective(Pn, xn)),
                slack=slack,
                localization=loc,
                dist_next=d,
                sup_drift=drift,
                drift_bound=rho_n * vn * schedule.M / 2,
                telescoping=tele,
                telescoping_bound=min(cum, schedule.eps),
                contraction_excess=contraction_excess(T, space, rho_n, Yt),
                selection=tag,
            )
        )
        log.debug("iteration %d rho=%.3g v=%.12g margin=%.3g d=%.3g", n, rho_n, vn1, margin, d)
        Pn, xn, vn = Pn1, xn1, vn1
        trace.points.append(xn.copy())
    if len(schedule.rho) == schedule.max_iters:
        trace.flags.append("max_iters")
    Q, y = Pn, xn
    trace.Q, trace.y = Q, y.copy()
    trace.sup_PQ = sup_distance(P, Q, drift_cfg, samples=drift_samples) if Q is not P else 0.0
    trace.dist_y = _dist(y, x, space)
    trace.dist_y_x1 = trace.dist_y
    fresh = v_norm(Q, cfg.with_(seed=cfg.seed + 1), warm_starts=y[None, :])
    trace.attainment_margin = float(best_known_v(fresh) - weighted_objective(Q, y))
    if trace.schedule.rho and trace.dist_y_x1 > schedule.rho[0]:
        trace.flags.append("final_localization")
    failed = [k for k, ok in trace.guarantees.items() if not ok]
    if failed:
        raise GuaranteeFailed(f"guarantees failed: {', '.join(failed)}", trace)
    return Q, y, trace


def _phase_align(k_next, k_prev, p):
    """Unit complex multiple of k_next closest to k_prev."""
    if p == 2:
        z = np.vdot(k_next, k_prev)
        ph = z / abs(z) if abs(z) > 0 else 1.0
        return k_next * ph
    thetas = np.linspace(0, 2 * np.pi, 721)[:-1]
    C = np.exp(1j * thetas)[:, None] * k_next[None, :]
    d = row_norms(C - k_prev[None, :], p)
    j = int(np.argmin(d))
    # bracket the kink at the minimum directly; a library scalar minimizer stops at sqrt(eps) |t|
    a, b = thetas[j] - 2 * np.pi / 720, thetas[j] + 2 * np.pi / 720
    f = lambda t: float(row_norms((np.exp(1j * t) * k_next - k_prev)[None, :], p)[0])  # noqa: E731
    for _ in range(60):
        c1, c2 = a + (b - a) * 0.382, a + (b - a) * 0.618
        if f(c1) <= f(c2):
            b = c2
        else:
            a = c1
    return np.exp(1j * (a + b) / 2) * k_next


def cauchy_monitor(trace: BollobasTrace, raise_on_fail: bool = True) -> dict:
    """Check ||k_{n+1} - k_n|| <= (2/r) rho_n + 1e-8 for phase-aligned unit directions."""
    p = trace.schedule.space.p
    pts = [np.asarray(z) for z in trace.points]
    rho = list(trace.schedule.rho)
    norms = [lp_norm_arr(z, p) for z in pts]
    report = {"points": len(pts), "increments": [], "status": "ok"}
    if len(pts) < 2:
        report["status"] = "too_short"
        return report
    live = [i for i, r in enumerate(norms) if r >= 1e-8]
    if not live:
        report["status"] = "converged to 0"
        return report
    r = min(norms[i] for i in live)
    report["r"] = r
    bad = []
    for i in range(len(pts) - 1):
        if norms[i] < 1e-8 or norms[i + 1] < 1e-8:
            continue
        k0 = pts[i] / norms[i]
        k1 = _phase_align(pts[i + 1] / norms[i + 1], k0, p)
        inc = lp_norm_arr(k1 - k0, p)
        bound = 2 * rho[i] / r + 1e-8
        report["increments"].append({"n": i + 1, "increment": inc, "bound": bound})
        if inc > bound:
            bad.append(i + 1)
    if bad:
        report["status"] = "violated"
        report["violations"] = bad
        if raise_on_fail:
            raise MonitorViolation(f"Cauchy bound violated at n = {bad}", report)
    return report
