"""Batched first-order ascent engines.

Each row of the state array is an independent restart. Rows that converge
are dropped from the working set, so cost tracks the slowest restart rather
than the total. Step sizes are Barzilai-Borwein with monotone backtracking:
a trial step is taken only if it strictly increases the objective.

Objectives expose ``value_and_gradient_rows(Y) -> (values, dvalues)`` where
``values`` are complex and ``dvalues`` is the holomorphic derivative. The
engines maximise ``|value|`` (sphere) or ``(1 - ||y||^2) |value|`` (ball), or
any real objective via :func:`ball_ascent_real`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import norm_gradient, row_norms

STEP_MIN = 1e-300
STEP_MAX = 1e8


@dataclass
class AscentResult:
    X: np.ndarray
    values: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray


def _abs_grad(v, D):
    """Packed real gradient of |v| for holomorphic v with derivative D."""
    a = np.abs(v)
    safe = np.where(a > 0, a, 1.0)
    phase = np.where(a > 0, v / safe, 1.0)
    return phase[:, None] * np.conj(D)


def _rdot(A, B):
    return np.einsum("ij,ij->i", np.conj(A), B).real


def _tangential(G, X, p):
    N = norm_gradient(X, p)
    nn = _rdot(N, N)
    coef = np.where(nn > 0, _rdot(N, G) / np.where(nn > 0, nn, 1.0), 0.0)
    return G - coef[:, None] * N


def _retract(X, radii, p):
    r = row_norms(X, p)
    safe = np.where(r > 0, r, 1.0)
    return X * (radii / safe)[:, None]


def _run(evaluate, X0, max_iters, step_tol, project=None):
    """Generic monotone BB ascent.

    ``evaluate(X, idx) -> (f, G)`` returns objective values and (already
    projected) packed gradients for rows ``idx``. ``project(X, idx)`` maps a
    trial point back onto the feasible set.
    """
    X = np.array(X0, dtype=np.complex128)
    m = X.shape[0]
    if project is not None:
        X = project(X, np.arange(m))
    f, G = evaluate(X, np.arange(m))
    gn = np.sqrt(_rdot(G, G))
    scale = np.maximum(row_norms(X, 2), 1e-3)
    t = np.where(gn > 0, 1e-2 * scale / np.where(gn > 0, gn, 1.0), 1.0)
    iters = np.zeros(m, dtype=int)
    converged = gn == 0
    active = np.flatnonzero(~converged)
    for _ in range(max_iters):
        if active.size == 0:
            break
        idx = active
        Xi, Gi, ti = X[idx], G[idx], t[idx]
        Xt = Xi + ti[:, None] * Gi
        if project is not None:
            Xt = project(Xt, idx)
        ft, Gt = evaluate(Xt, idx)
        iters[idx] += 1
        ok = ft > f[idx]
        step = Xt - Xi
        snorm = np.sqrt(_rdot(step, step))
        # BB1 for ascent: t = <s,s> / -<s, dG>
        sy = -_rdot(step, Gt - Gi)
        ss = snorm**2
        bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 2.0 * ti)
        new_t = np.where(ok, np.clip(bb, STEP_MIN, STEP_MAX), ti * 0.25)
        acc = idx[ok]
        X[acc] = Xt[ok]
        f[acc] = ft[ok]
        G[acc] = Gt[ok]
        t[idx] = new_t
        gnew = np.sqrt(_rdot(G[idx], G[idx]))
        # a short accepted step only counts if the next BB step is short too
        done_step = ok & (snorm < step_tol) & (new_t * gnew < 10 * step_tol)
        stalled = (~ok) & (ti * gnew < step_tol * 1e-3)
        done = done_step | stalled | (gnew == 0)
        converged[idx[done]] = True
        active = idx[~done]
    return AscentResult(X, f, iters, converged)


def sphere_ascent(obj, X0, radii, p, max_iters=2000, step_tol=1e-10):
    """Maximise |obj| over the l_p spheres ||y|| = radii[row]."""
    radii = np.asarray(radii, dtype=float)

    def evaluate(X, idx):
        v, D = obj.value_and_gradient_rows(X)
        G = _tangential(_abs_grad(v, D), X, p)
        return np.abs(v), G

    def project(X, idx):
        return _retract(X, radii[idx], p)

    return _run(evaluate, X0, max_iters, step_tol, project)


def weighted_value_grad(obj, X, p):
    v, D = obj.value_and_gradient_rows(X)
    a = np.abs(v)
    r = row_norms(X, p)
    w = 1.0 - r * r
    G = w[:, None] * _abs_grad(v, D) - (2.0 * r * a)[:, None] * norm_gradient(X, p)
    return w * a, G


def ball_ascent(obj, X0, p, max_iters=2000, step_tol=1e-10):
    """Maximise (1 - ||y||_p^2) |obj(y)| over the open unit ball."""

    def evaluate(X, idx):
        return weighted_value_grad(obj, X, p)

    return _run(evaluate, X0, max_iters, step_tol)


def ball_ascent_real(evaluate, X0, max_iters=2000, step_tol=1e-10, project=None):
    """Maximise a caller-supplied real objective ``evaluate(X, idx) -> (f, G)``."""
    return _run(evaluate, X0, max_iters, step_tol, project)
