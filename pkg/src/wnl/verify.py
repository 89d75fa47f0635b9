"""Seeded property suite behind ``wnl verify``.

Each property returns ``(passed, detail)``. Details print floats with a fixed
number of significant digits so two runs with the same seed produce the
same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import constants as C
from .bollobas import (
    Schedule,
    bollobas_correct,
    cauchy_monitor,
    normalize_v_with_result,
    contraction_excess,
)
from .counterexamples import exact_sup_Pr, make_Pr, phase_sup_Pr, verify_Q
from .errors import VerificationFailure
from .norms import (
    OptimizerConfig,
    best_known_v,
    check_equivalence,
    check_lower_bound_lemma,
    s_norm,
    s_norms,
    sup_distance,
    sup_norm,
    v_norm,
)
from .polynomial import Polynomial, functional_power, make_projection, make_T, precompose, random_diagonal
from .space import (
    STANDARD_WEIGHT,
    Functional,
    LpSpace,
    LpVector,
    dist_to_span,
    duality_functional,
    lp_norm,
    modulus_of_convexity,
    row_norms,
    weight_eval,
)

UC_PS = (1.5, 2.0, 3.0)


def fmt(x) -> str:
    return f"{x:.6g}"


@dataclass(frozen=True)
class Property:
    name: str
    run: Callable[[int], tuple]


def _rng(seed, salt):
    return np.random.default_rng([seed, salt])


def _cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# space


def p_norm_axioms(seed):
    rng = _rng(seed, 1)
    worst = 0.0
    for p in (1.0, 1.5, 2.0, 3.0, math.inf):
        sp = LpSpace(5, p)
        if lp_norm(sp.zero()) != 0:
            return False, f"zero vector has nonzero norm for p={p}"
        for _ in range(50):
            v = sp.vector(_cvec(rng, 5))
            a = complex(*rng.standard_normal(2))
            if lp_norm(v) == 0:
                return False, "nonzero vector has zero norm"
            worst = max(worst, abs(lp_norm(v * a) - abs(a) * lp_norm(v)) / (abs(a) * lp_norm(v)))
    return worst <= 1e-12, f"max rel homogeneity error {fmt(worst)}"


def p_duality(seed):
    rng = _rng(seed, 2)
    worst = -math.inf
    worst_eq = 0.0
    for p in UC_PS:
        sp = LpSpace(5, p)
        for _ in range(50):
            x = sp.vector(_cvec(rng, 5))
            f = duality_functional(x)
            worst_eq = max(worst_eq, abs(f(x) - lp_norm(x)) / lp_norm(x))
            Y = _cvec(rng, 5 * 20).reshape(20, 5)
            worst = max(worst, float(np.max(np.abs(f.apply_rows(Y)) / row_norms(Y, p))) - 1)
    ok = worst <= 1e-10 and worst_eq <= 1e-10
    return ok, f"max |f(y)|/|y| - 1 = {fmt(worst)}, max |f(x) - |x||/|x| = {fmt(worst_eq)}"


def p_dist_to_span(seed):
    rng = _rng(seed, 3)
    worst_in, worst_up = 0.0, -math.inf
    for p in UC_PS:
        sp = LpSpace(4, p)
        for _ in range(10):
            x = sp.vector(_cvec(rng, 4))
            y = sp.vector(_cvec(rng, 4))
            lam = complex(*rng.standard_normal(2))
            worst_up = max(worst_up, dist_to_span(y, x) - lp_norm(y))
            worst_in = max(worst_in, dist_to_span(x * lam, x))
    ok = worst_up <= 0 and worst_in <= 1e-10
    return ok, f"max d(y)-|y| = {fmt(worst_up)}, max d(lam x) = {fmt(worst_in)}"


def p_modulus(seed):
    rng = _rng(seed, 4)
    worst = -math.inf
    mono = True
    for p in UC_PS:
        sp = LpSpace(3, p)
        t = np.linspace(0, 2, 1001)
        d = modulus_of_convexity(sp, t)
        mono &= bool(np.all(np.diff(d) >= 0))
        X = sp.random_sphere(rng, 10_000)
        Y = sp.random_sphere(rng, 10_000)
        tp = np.minimum(row_norms(X - Y, p), 2.0)
        gap = 1 - row_norms((X + Y) / 2, p)
        worst = max(worst, float(np.max(modulus_of_convexity(sp, tp) - gap)))
    ok = mono and worst <= 1e-8
    return ok, f"nondecreasing={mono}, max delta(t) - (1 - |mid|) = {fmt(worst)}"


def p_weight(seed):
    s = np.linspace(0, 1, 1000)
    w = np.array([weight_eval(STANDARD_WEIGHT, float(t)) for t in s])
    ok = bool(np.all(np.diff(w) < 0)) and bool(w[0] == 1.0) and bool(w[-1] == 0.0)
    return ok, f"v(0) = {fmt(w[0])}, v(1) = {fmt(w[-1])}"


# polynomial


def _rand_poly(rng, n=4, p=2.0, deg=2, homogeneous=False):
    return random_diagonal(LpSpace(n, p), deg, rng, homogeneous=homogeneous)


def p_precompose_degree(seed):
    rng = _rng(seed, 5)
    worst = 0.0
    for p in UC_PS:
        sp = LpSpace(4, p)
        for N in (1, 2, 3):
            P = random_diagonal(sp, N, rng, homogeneous=True)
            x = sp.vector(_cvec(rng, 4))
            PT = precompose(P, make_T(0.3, x))
            if PT.degree != N or PT.degrees != P.degrees:
                return False, "degree changed"
            Y = _cvec(rng, 40).reshape(10, 4) * 0.3
            lam = 0.7 - 0.2j
            a = PT.evaluate_rows(lam * Y)
            b = lam**N * PT.evaluate_rows(Y)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))
    return worst <= 1e-10, f"max homogeneity defect {fmt(worst)}"


def p_projection_idempotent(seed):
    rng = _rng(seed, 6)
    worst = 0.0
    for p in UC_PS:
        sp = LpSpace(5, p)
        for _ in range(10):
            Px = make_projection(sp.vector(_cvec(rng, 5)))
            Y = _cvec(rng, 50).reshape(10, 5)
            A = Px.apply_rows(Y)
            worst = max(worst, float(np.max(row_norms(Px.apply_rows(A) - A, p))))
    return worst <= 1e-12, f"max |P(P y) - P y| = {fmt(worst)}"


def p_contraction(seed):
    rng = _rng(seed, 7)
    worst = -math.inf
    for p in UC_PS:
        sp = LpSpace(4, p)
        for rho in (0.05, 0.3, 0.5):
            x = sp.vector(sp.random_ball(rng, 1)[0])
            worst = max(worst, contraction_excess(make_T(rho, x), sp, rho, sp.random_ball(rng, 2000)))
    return worst <= 1e-10, f"max |T y| - |y|(1 - delta) = {fmt(worst)}"


def p_drift(seed):
    rng = _rng(seed, 8)
    cfg = OptimizerConfig(seed=seed, restarts=16)
    worst = -math.inf
    for p in (2.0, 3.0):
        P = _rand_poly(rng, 4, p, 2)
        v = best_known_v(v_norm(P, cfg))
        M = C.M_N(P.degree)
        x = LpVector(P.space.random_ball(rng, 1)[0], P.space)
        for rho in (0.01, 0.1):
            d = sup_distance(P, precompose(P, make_T(rho, x)), cfg)
            worst = max(worst, d - rho * v * M / 2)
    return worst <= 1e-10, f"max drift - rho |P|_v M/2 = {fmt(worst)}"


def p_lipschitz(seed):
    rng = _rng(seed, 9)
    cfg = OptimizerConfig(seed=seed, restarts=16)
    worst = -math.inf
    for p in (2.0, 3.0):
        P = _rand_poly(rng, 4, p, 3)
        v = best_known_v(v_norm(P, cfg))
        L = v * C.M_N(P.degree) / 4
        Y, Z = P.space.random_ball(rng, 2000), P.space.random_ball(rng, 2000)
        lhs = np.abs(P.evaluate_rows(Y) - P.evaluate_rows(Z))
        worst = max(worst, float(np.max(lhs - L * row_norms(Y - Z, p))))
    return worst <= 1e-10, f"max |P(y)-P(z)| - L|y-z| = {fmt(worst)}"


def p_json(seed):
    rng = _rng(seed, 10)
    sp = LpSpace(3, 2.0)
    P = precompose(random_diagonal(sp, 3, rng), make_T(0.2, sp.vector(_cvec(rng, 3))))
    f = Functional(np.array([0.6, 0.8j, 0]), sp)
    Q = Polynomial(sp, P.components + functional_power(f, 4, 2 - 1j).components, P.chain)
    R = Polynomial.from_json(Q.to_json())
    Y = _cvec(rng, 30).reshape(10, 3) * 0.3
    err = float(np.max(np.abs(R.evaluate_rows(Y) - Q.evaluate_rows(Y))))
    return err == 0.0 and R.to_json() == Q.to_json(), f"max eval difference {fmt(err)}"


# constants


def p_delta_grid(seed):
    r = np.linspace(0, 1, 1_000_001)
    worst = 0.0
    for N in range(1, C.N_MAX + 1):
        g = r**N - r ** (N + 2)
        j = int(np.argmax(g))
        a, b = r[max(j - 1, 0)], r[min(j + 1, len(r) - 1)]
        h = lambda t: t**N - t ** (N + 2)  # noqa: E731
        for _ in range(80):
            c1, c2 = a + (b - a) * 0.381966, a + (b - a) * 0.618034
            if h(c1) >= h(c2):
                b = c2
            else:
                a = c1
        best = max(float(g[j]), h((a + b) / 2))
        worst = max(worst, abs(best - C.delta_N(N)))
    ok = worst <= 1e-9 and abs(C.delta_N(2) - 0.25) <= 1e-12
    return ok, f"max |grid - closed form| = {fmt(worst)}, delta_2 = {fmt(C.delta_N(2))}"


def p_s_alpha_identity(seed):
    # (1 - s^N) N^(N+1)/N! recovers alpha; the rounding of s itself costs cond * 2^-53
    worst = 0.0
    for N in range(1, C.N_MAX + 1):
        for alpha in (0.1, 0.5, 0.9):
            s = C.s_alpha_N(alpha, N)
            one_minus = -math.expm1(N * math.log(s))
            back = one_minus * math.exp((N + 1) * math.log(N) - math.lgamma(N + 1))
            cond = N * s**N / one_minus
            tol = 1e-12 + 4 * cond * 2.0**-53
            worst = max(worst, abs(back - alpha) / alpha / tol)
    return worst <= 1.0, f"max residual / tolerance = {fmt(worst)}"


def p_mu_increasing(seed):
    rho = np.linspace(1e-3, 1, 1000)
    ok = True
    for p in UC_PS:
        m = np.asarray(C.mu(rho, LpSpace(2, p)))
        ok &= bool(np.all(np.diff(m) > 0))
    return ok, "strictly increasing on 1000 points for p in {1.5, 2, 3}"


# norms


def p_scaling(seed):
    rng = _rng(seed, 11)
    cfg = OptimizerConfig(seed=seed, restarts=16)
    P = _rand_poly(rng, 4, 2.0, 3)
    a = 2.5
    worst = 0.0
    for f in (lambda Q: s_norm(Q, 0.6, cfg), lambda Q: sup_norm(Q, cfg), lambda Q: v_norm(Q, cfg)):
        r1, r2 = f(P), f(P.scaled(a))
        worst = max(worst, abs(r2.value - a * r1.value) / (a * r1.value))
    return worst <= 1e-8, f"max rel scaling error {fmt(worst)}"


def p_radial_law(seed):
    rng = _rng(seed, 12)
    cfg = OptimizerConfig(seed=seed, restarts=16)
    worst = 0.0
    for N in (1, 2, 3):
        P = _rand_poly(rng, 5, 2.0, N, homogeneous=True)
        grid = [0.3, 0.6, 1.0]
        vals = [r.value for r in s_norms(P, grid, cfg)]
        for s, vs in zip(grid, vals):
            for r, vr in zip(grid, vals):
                worst = max(worst, abs(vr - (r / s) ** N * vs) / vr)
    return worst <= 1e-6, f"max rel deviation {fmt(worst)}"


def p_restriction(seed):
    rng = _rng(seed, 13)
    cfg = OptimizerConfig(seed=seed, restarts=16, s_grid=129)
    worst = 0.0
    for _ in range(3):
        P = _rand_poly(rng, 4, 2.0, 3)
        a = v_norm(P, cfg).value
        b = v_norm(P, cfg, s_max=1.0).value
        worst = max(worst, abs(a - b))
    return worst <= 1e-8, f"max |v[0,s(N)] - v[0,1]| = {fmt(worst)}"


def p_interior(seed):
    rng = _rng(seed, 14)
    cfg = OptimizerConfig(seed=seed, restarts=16)
    worst = 0.0
    for p in (2.0, 3.0):
        r = v_norm(_rand_poly(rng, 4, p, 3), cfg)
        worst = max(worst, r.s_star)
    return worst < 1, f"max witness norm {fmt(worst)}"


_FN_CACHE: dict = {}


def _fN_values(seed):
    if seed not in _FN_CACHE:
        sp = LpSpace(4, 2.0)
        f = Functional(np.eye(4)[0], sp)
        cfg = OptimizerConfig(seed=seed, restarts=8)
        out = []
        for N in range(1, 9):
            P = functional_power(f, N)
            out.append((v_norm(P, cfg).value, sup_norm(P, cfg).value))
        _FN_CACHE[seed] = out
    return _FN_CACHE[seed]


def p_fN_ladder(seed):
    vals = [v for v, _ in _fN_values(seed)]
    dec = all(a > b for a, b in zip(vals, vals[1:]))
    err = max(abs(v - C.delta_N(N)) for N, v in enumerate(vals, 1))
    return dec and err <= 1e-6, f"strictly decreasing={dec}, max |v - delta_N| = {fmt(err)}"


def p_fN_ratio(seed):
    err = max(abs(v / s - C.delta_N(N)) for N, (v, s) in enumerate(_fN_values(seed), 1))
    return err <= 1e-6, f"max |v/sup - delta_N| = {fmt(err)}"


def p_norm_inequalities(seed):
    rng = _rng(seed, 15)
    cfg = OptimizerConfig(seed=seed, restarts=16)
    grid = np.linspace(0.05, 0.95, 10)
    worst = math.inf
    for _ in range(3):
        P = _rand_poly(rng, 4, 2.0, 3)
        sup = sup_norm(P, cfg)
        a = check_lower_bound_lemma(P, grid, cfg, sup=sup, raise_on_fail=False)
        b = check_equivalence(P, grid, cfg, sup=sup, raise_on_fail=False)
        worst = min(worst, a["min_slack"], b["min_slack"])
    return worst >= -1e-8, f"min slack {fmt(worst)}"


# counterexamples


def p_Pr_upper(seed):
    cfg = OptimizerConfig(seed=seed, restarts=16)
    P = make_Pr(2.0, 2, 0.9, 16)
    grid = [0.1 * i for i in range(1, 10)]
    worst = max(r.value - exact_sup_Pr(s, 0.9, 2)[0] for s, r in zip(grid, s_norms(P, grid, cfg)))
    return worst <= 1e-9, f"max numeric - closed form = {fmt(worst)}"


def p_Pr_phase(seed):
    cfg = OptimizerConfig(seed=seed, restarts=16)
    P = make_Pr(2.0, 2, 0.9, 16)
    grid = [0.1 * i for i in range(1, 11)]
    worst = max(abs(r.value - phase_sup_Pr(s, 0.9, 2)) for s, r in zip(grid, s_norms(P, grid, cfg)))
    return worst <= 1e-6, f"max |numeric - phase-aware sup| = {fmt(worst)}"


def p_Pr_escape(seed):
    cfg = OptimizerConfig(seed=seed, restarts=16)
    exact = exact_sup_Pr(1.0, 0.9, 2)[0]
    gaps = [exact - sup_norm(make_Pr(2.0, 2, 0.9, n), cfg).value for n in (16, 32, 64, 128)]
    ratios = [a / b if b != 0 else math.inf for a, b in zip(gaps, gaps[1:])]
    ok = all(g > 0 for g in gaps) and all(abs(r - 2) <= 0.4 for r in ratios)
    return ok, "gaps " + ", ".join(fmt(g) for g in gaps)


def p_Q(seed):
    rep = verify_Q(2.0, 2, 16, OptimizerConfig(seed=seed, restarts=16), seeds=(seed,))
    return rep["passed"], "clauses " + ", ".join(f"{k}={v}" for k, v in rep["clauses"].items())


# bollobas


def p_schedule(seed):
    sp = LpSpace(4, 2.0)
    ok = True
    for sch in (Schedule.faithful(0.05, 2, sp), Schedule.practical(0.1, 50.0, sp, rho_tol=1e-15)):
        ok &= sch.M * sum(sch.rho) <= sch.eps and sch.M * sum(sch.rho[1:]) <= sch.mu(sch.rho[0])
    return ok, "summability bounds hold in both modes"


def _bollobas_case(seed, mode, eps):
    rng = _rng(seed, 16)
    cfg = OptimizerConfig(seed=seed, restarts=16)
    P, res = normalize_v_with_result(_rand_poly(rng, 4, 2.0, 2), cfg)
    try:
        _, _, tr = bollobas_correct(P, res.witness.coords, eps, mode, cfg)
    except VerificationFailure as e:
        return False, str(e)
    rep = cauchy_monitor(tr, raise_on_fail=False)
    ok = tr.ok and rep["status"] == "ok"
    return ok, f"iterations={len(tr.records)}, |P-Q|={fmt(tr.sup_PQ)}, d(y,x)={fmt(tr.dist_y)}, margin={fmt(tr.attainment_margin)}"


def p_bollobas_practical(seed):
    return _bollobas_case(seed, "practical", 0.1)


def p_bollobas_faithful(seed):
    return _bollobas_case(seed, "faithful", 0.05)


PROPERTIES = [
    Property("space.norm_axioms", p_norm_axioms),
    Property("space.duality", p_duality),
    Property("space.dist_to_span", p_dist_to_span),
    Property("space.modulus_lower_bound", p_modulus),
    Property("space.weight", p_weight),
    Property("polynomial.precompose_degree", p_precompose_degree),
    Property("polynomial.projection_idempotent", p_projection_idempotent),
    Property("polynomial.contraction", p_contraction),
    Property("polynomial.drift", p_drift),
    Property("polynomial.lipschitz", p_lipschitz),
    Property("polynomial.json_roundtrip", p_json),
    Property("constants.delta_grid", p_delta_grid),
    Property("constants.s_alpha_identity", p_s_alpha_identity),
    Property("constants.mu_increasing", p_mu_increasing),
    Property("norms.scaling", p_scaling),
    Property("norms.radial_law", p_radial_law),
    Property("norms.restriction", p_restriction),
    Property("norms.interior", p_interior),
    Property("norms.fN_ladder", p_fN_ladder),
    Property("norms.inequalities", p_norm_inequalities),
    Property("counterexamples.Pr_upper_bound", p_Pr_upper),
    Property("counterexamples.Pr_phase_sup", p_Pr_phase),
    Property("counterexamples.Pr_escape", p_Pr_escape),
    Property("counterexamples.Q", p_Q),
    Property("counterexamples.fN_ratio", p_fN_ratio),
    Property("bollobas.schedule", p_schedule),
    Property("bollobas.practical", p_bollobas_practical),
    Property("bollobas.faithful", p_bollobas_faithful),
]


def select(filter_: str | None = None):
    if not filter_:
        return list(PROPERTIES)
    keys = [k.strip() for k in filter_.split(",") if k.strip()]
    return [p for p in PROPERTIES if any(k in p.name for k in keys)]


def run_suite(seed: int = 0, filter_: str | None = None):
    """List of result dicts in suite order."""
    _FN_CACHE.clear()
    out = []
    for prop in select(filter_):
        try:
            ok, detail = prop.run(seed)
        except Exception as e:  # a crash is a failed property, reported like one
            ok, detail = False, f"{type(e).__name__}: {e}"
        out.append({"name": prop.name, "passed": bool(ok), "detail": detail})
    return out
