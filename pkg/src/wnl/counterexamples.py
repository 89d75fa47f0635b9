"""The explicit polynomials P_r, Q and f_N, with closed-form oracles.

Non-attainment cannot be seen in finite dimensions, so it is read off a
truncation to l_p^n as "escape": the numerical maximizer concentrates on the
last coordinate and its gap to the infinite-dimensional supremum shrinks
like 1/n.

A caveat on P_r. Its degree-(k+1) coefficient ``1 - r^(-k-1)/n`` is
negative for small n, so a phase flip of the first coordinate beats
``s e_1``: ``|P_r(-s e_1)| = s^k + (s/r)^k + (s/r)^(k+1) - s^(k+1)``, which
is strictly larger than the value at ``s e_1``. By the vertex bound
``sum_n (A_n + |B_n| |x_n|) |x_n|^k <= max_n (A_n + |B_n|)`` this is the
true supremum for every s, and it is attained. :func:`exact_sup_Pr` keeps
the nonnegative-phase formula; :func:`phase_sup_Pr` is the true value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import delta_N, s_of_N
from .errors import NotUnitFunctional, OutOfDomain
from .norms import DEFAULT_CONFIG, OptimizerConfig, s_norms, sup_norm, v_norm, attainment_witness
from .polynomial import Polynomial, diagonal, functional_power
from .space import INF, Functional, LpSpace, row_norms


@dataclass(frozen=True)
class TruncationDiagnostic:
    n_trunc: int
    gap: float
    escape_index: int  # 1-based

    def __post_init__(self):
        if not (1 <= self.escape_index <= self.n_trunc):
            raise OutOfDomain("escape index outside 1..n_trunc")


def _check_family(p, k, n_trunc):
    if not (1 <= p < INF):
        raise OutOfDomain(f"need 1 <= p < inf, got {p}")
    if int(k) != k or k < p:
        raise OutOfDomain(f"need an integer k >= p, got k={k}, p={p}")
    if int(n_trunc) != n_trunc or n_trunc < 1:
        raise OutOfDomain(f"n_trunc must be a positive integer, got {n_trunc}")


def make_Pr(p: float, k: int, r: float, n_trunc: int) -> Polynomial:
    """sum_n (1 + r^-k/n) x_n^k + (1 - r^(-k-1)/n) x_n^(k+1), truncated to n <= n_trunc."""
    _check_family(p, k, n_trunc)
    if not (0 < r < 1):
        raise OutOfDomain(f"r must lie in (0, 1), got {r}")
    n = np.arange(1, n_trunc + 1, dtype=float)
    return diagonal(LpSpace(n_trunc, p), {k: 1 + r ** (-k) / n, k + 1: 1 - r ** (-k - 1) / n})


def exact_sup_Pr(s: float, r: float, k: int):
    """(value, attained) from the nonnegative-phase analysis of P_r.

    s <= r: s^k + s^(k+1) + (s/r)^k - (s/r)^(k+1), attained at s e_1.
    s > r: the limit s^k + s^(k+1) along s e_n, not attained.
    """
    if not (0 < s <= 1):
        raise OutOfDomain(f"s must lie in (0, 1], got {s}")
    if s <= r:
        return s**k + s ** (k + 1) + (s / r) ** k - (s / r) ** (k + 1), True
    return s**k + s ** (k + 1), False


def phase_sup_Pr(s: float, r: float, k: int):
    """True sup of |P_r| on the sphere sS, attained at -s e_1 for every s."""
    if not (0 < s <= 1):
        raise OutOfDomain(f"s must lie in (0, 1], got {s}")
    return s**k + (s / r) ** k + (s / r) ** (k + 1) - s ** (k + 1)


def make_Q(p: float, k: int, n_trunc: int) -> Polynomial:
    """sum_n (1 - 1/n) x_n^k + (1 + 1/n) x_n^(k+1)."""
    _check_family(p, k, n_trunc)
    n = np.arange(1, n_trunc + 1, dtype=float)
    return diagonal(LpSpace(n_trunc, p), {k: 1 - 1 / n, k + 1: 1 + 1 / n})


def exact_s_norm_Q(s: float, k: int) -> float:
    """Supremum of |Q| over sS (never attained for s < 1; equals 2 at s = 1)."""
    return s**k + s ** (k + 1)


def make_fN(f: Functional, N: int) -> Polynomial:
    if abs(f.dual_norm() - 1.0) > 1e-12:
        raise NotUnitFunctional(f"||f||_q = {f.dual_norm()}, expected 1")
    return functional_power(f, N)


def escape_index(x) -> int:
    """1-based index of the coordinate of largest modulus."""
    x = np.asarray(getattr(x, "coords", x))
    return int(np.argmax(np.abs(x))) + 1


def axis_distance(x, j: int, s: float, p: float) -> float:
    """min over phases of ||x - e^{i t} s e_j||_p (j is 0-based)."""
    x = np.array(getattr(x, "coords", x), dtype=np.complex128)
    x[j] = abs(x[j]) - s
    return float(row_norms(x[None, :], p)[0])


def truncation_diagnostic(result, exact: float) -> TruncationDiagnostic:
    n = result.witness.space.dim
    return TruncationDiagnostic(n, float(exact - result.value), escape_index(result.witness))


def _grid(values, default):
    return list(default if values is None else values)


def verify_Pr(p, k, r, n_trunc, cfg: OptimizerConfig = DEFAULT_CONFIG, s_grid=None, gap_const=2.0):
    """Check the three P_r clauses; returns a report, never raises on failure.

    (i)   s <= r: numeric s-norm within 1e-6 of exact_sup_Pr, witness within
          1e-4 of s e_1 up to phase.
    (ii)  s = 1: 0 < gap <= gap_const / n_trunc and escape_index == n_trunc.
    (iii) v-norm attained inside the ball, s_star <= s(k+1) + 1e-6, margin <= 1e-6.
    """
    P = make_Pr(p, k, r, n_trunc)
    grid = _grid(s_grid, [round(0.1 * i, 10) for i in range(1, 10)])
    grid = [s for s in grid if s <= r]
    rows = []
    ok_i = True
    for s, res in zip(grid, s_norms(P, grid, cfg)):
        exact, _ = exact_sup_Pr(s, r, k)
        d = axis_distance(res.witness, 0, s, p)
        passed = abs(res.value - exact) <= 1e-6 and d <= 1e-4
        ok_i &= passed
        rows.append(
            {
                "s": s,
                "numeric": res.value,
                "exact": exact,
                "gap": exact - res.value,
                "escape_index": escape_index(res.witness),
                "phase_sup": phase_sup_Pr(s, r, k),
                "axis_distance": d,
                "passed": passed,
            }
        )
    sup = sup_norm(P, cfg)
    exact1, _ = exact_sup_Pr(1.0, r, k)
    diag = truncation_diagnostic(sup, exact1)
    ok_ii = 0 < diag.gap <= gap_const / n_trunc and diag.escape_index == n_trunc
    rows.append(
        {
            "s": 1.0,
            "numeric": sup.value,
            "exact": exact1,
            "gap": diag.gap,
            "escape_index": diag.escape_index,
            "phase_sup": phase_sup_Pr(1.0, r, k),
            "passed": ok_ii,
        }
    )
    v = v_norm(P, cfg)
    s_star, _, margin = attainment_witness(P, v)
    sN = s_of_N(k + 1)
    ok_iii = s_star < 1 and s_star <= sN + 1e-6 and margin <= 1e-6
    return {
        "family": "Pr",
        "p": p,
        "k": k,
        "r": r,
        "n_trunc": n_trunc,
        "hypothesis_r_ge_s_of_N": r >= sN,
        "s_of_N": sN,
        "rows": rows,
        "clauses": {"i": bool(ok_i), "ii": bool(ok_ii), "iii": bool(ok_iii)},
        "v_norm": v.value,
        "s_star": s_star,
        "margin": margin,
        "passed": bool(ok_i and ok_ii and ok_iii),
    }


def verify_Q(p, k, n_trunc, cfg: OptimizerConfig = DEFAULT_CONFIG, s_grid=None, seeds=(0, 1, 2, 3, 4)):
    """Check the three Q clauses; returns a report.

    (i)   sup-norm = 2 within 1e-6, witness within 1e-4 of a basis axis.
    (ii)  s < 1: numeric within (s^k - s^(k+1))/n_trunc + 1e-6 of s^k + s^(k+1),
          escape_index == n_trunc.
    (iii) the direct ball maximizer of (1 - ||x||^2)|Q(x)| escapes, for each seed.
    """
    Q = make_Q(p, k, n_trunc)
    grid = _grid(s_grid, [0.25, 0.5, 0.75])
    sup = sup_norm(Q, cfg)
    j = escape_index(sup.witness) - 1
    ok_i = abs(sup.value - 2.0) <= 1e-6 and axis_distance(sup.witness, j, 1.0, p) <= 1e-4
    rows = [
        {
            "s": 1.0,
            "numeric": sup.value,
            "exact": 2.0,
            "gap": 2.0 - sup.value,
            "escape_index": j + 1,
            "passed": bool(ok_i),
        }
    ]
    ok_ii = True
    for s, res in zip(grid, s_norms(Q, grid, cfg)):
        exact = exact_s_norm_Q(s, k)
        diag = truncation_diagnostic(res, exact)
        bound = (s**k - s ** (k + 1)) / n_trunc + 1e-6
        passed = abs(diag.gap) <= bound and diag.escape_index == n_trunc
        ok_ii &= passed
        rows.append(
            {"s": s, "numeric": res.value, "exact": exact, "gap": diag.gap, "escape_index": diag.escape_index, "passed": passed}
        )
    escapes = []
    for sd in seeds:
        v = v_norm(Q, cfg.with_(seed=sd))
        bw = np.array([complex(a, b) for a, b in v.diagnostics["method_b_witness"]])
        escapes.append({"seed": sd, "escape_index": escape_index(bw), "v_norm": v.value})
    ok_iii = all(e["escape_index"] == n_trunc for e in escapes)
    return {
        "family": "Q",
        "p": p,
        "k": k,
        "n_trunc": n_trunc,
        "rows": rows,
        "ball_escapes": escapes,
        "clauses": {"i": bool(ok_i), "ii": bool(ok_ii), "iii": bool(ok_iii)},
        "passed": bool(ok_i and ok_ii and ok_iii),
    }


def verify_fN(p, N, n, cfg: OptimizerConfig = DEFAULT_CONFIG, s_grid=None):
    """f_N = (e_1^*)^N on l_p^n: sup-norm 1 and v-norm delta_N, both within 1e-6."""
    space = LpSpace(n, p)
    f = Functional(np.eye(n)[0], space)
    P = make_fN(f, N)
    grid = _grid(s_grid, [0.25, 0.5, 0.75])
    rows = []
    ok_s = True
    for s, res in zip(grid, s_norms(P, grid, cfg)):
        exact = s**N
        passed = abs(res.value - exact) <= 1e-6
        ok_s &= passed
        rows.append(
            {"s": s, "numeric": res.value, "exact": exact, "gap": exact - res.value, "escape_index": escape_index(res.witness), "passed": passed}
        )
    sup = sup_norm(P, cfg)
    v = v_norm(P, cfg)
    ok_sup = abs(sup.value - 1.0) <= 1e-6
    ok_v = abs(v.value - delta_N(N)) <= 1e-6
    rows.append({"s": 1.0, "numeric": sup.value, "exact": 1.0, "gap": 1.0 - sup.value, "escape_index": escape_index(sup.witness), "passed": ok_sup})
    return {
        "family": "fN",
        "p": p,
        "N": N,
        "n": n,
        "rows": rows,
        "v_norm": v.value,
        "delta_N": delta_N(N),
        "s_star": v.s_star,
        "clauses": {"s_norms": bool(ok_s), "sup": bool(ok_sup), "v": bool(ok_v)},
        "passed": bool(ok_s and ok_sup and ok_v),
    }
