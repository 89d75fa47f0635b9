import numpy as np
import pytest

from wnl.constants import delta_N
from wnl.counterexamples import (
    TruncationDiagnostic,
    axis_distance,
    escape_index,
    exact_s_norm_Q,
    exact_sup_Pr,
    make_fN,
    make_Pr,
    make_Q,
    phase_sup_Pr,
    verify_fN,
    verify_Pr,
    verify_Q,
)
from wnl.errors import NotUnitFunctional, OutOfDomain
from wnl.norms import OptimizerConfig, s_norms, sup_norm
from wnl.polynomial import eval_poly
from wnl.space import Functional, LpSpace


def test_Pr_coefficients():
    P = make_Pr(2, 2, 0.5, 3)
    e2 = np.array([0, 1, 0])
    # (1 + 4/2) + (1 - 8/2)
    assert eval_poly(P, e2) == pytest.approx(3 - 3)
    assert P.degrees == [2, 3]


@pytest.mark.parametrize("args", [(2, 1, 0.5, 4), (3, 2, 0.5, 4), (2, 2, 1.0, 4), (2, 2, 0.5, 0), (np.inf, 2, 0.5, 4)])
def test_Pr_domain(args):
    with pytest.raises(OutOfDomain):
        make_Pr(*args)


def test_Q_domain():
    with pytest.raises(OutOfDomain):
        make_Q(3, 2, 8)


def test_closed_forms():
    v, att = exact_sup_Pr(0.5, 0.9, 2)
    assert att and v == pytest.approx(0.25 + 0.125 + (0.5 / 0.9) ** 2 - (0.5 / 0.9) ** 3)
    v, att = exact_sup_Pr(0.95, 0.9, 2)
    assert not att and v == pytest.approx(0.95**2 + 0.95**3)
    assert exact_s_norm_Q(0.5, 2) == 0.375
    with pytest.raises(OutOfDomain):
        exact_sup_Pr(0, 0.9, 2)


@pytest.mark.parametrize("s", [0.2, 0.5, 0.9, 1.0])
def test_Pr_phase_flip_beats_closed_form(s):
    # the x^(k+1) coefficient on e_1 is negative, so -s e_1 gives more than s e_1
    P = make_Pr(2, 2, 0.9, 8)
    e1 = np.eye(8)[0]
    assert abs(eval_poly(P, -s * e1)) == pytest.approx(phase_sup_Pr(s, 0.9, 2), rel=1e-12)
    assert phase_sup_Pr(s, 0.9, 2) > exact_sup_Pr(s, 0.9, 2)[0]


def test_Pr_numeric_sup_is_phase_aware(cfg):
    P = make_Pr(2, 2, 0.9, 16)
    grid = [0.1, 0.5, 0.9, 1.0]
    for s, r in zip(grid, s_norms(P, grid, cfg)):
        assert r.value == pytest.approx(phase_sup_Pr(s, 0.9, 2), abs=1e-9)
        assert escape_index(r.witness) == 1
        assert axis_distance(r.witness, 0, s, 2) <= 1e-6


def test_Pr_phase_sup_is_an_upper_bound(rng):
    # vertex bound: sum (A_n + |B_n| |x_n|)|x_n|^2 <= max_n (A_n + |B_n|) on the unit l_2 sphere
    sp = LpSpace(16, 2)
    P = make_Pr(2, 2, 0.9, 16)
    Y = sp.random_sphere(rng, 20000)
    assert np.abs(P.evaluate_rows(Y)).max() <= phase_sup_Pr(1.0, 0.9, 2)


def test_verify_Pr_report_shape(cfg):
    rep = verify_Pr(2, 2, 0.9, 16, cfg.with_(s_grid=65), s_grid=[0.3, 0.6])
    assert set(rep["clauses"]) == {"i", "ii", "iii"}
    assert [r["s"] for r in rep["rows"]] == [0.3, 0.6, 1.0]
    assert not rep["clauses"]["i"]
    assert rep["clauses"]["iii"]
    assert rep["hypothesis_r_ge_s_of_N"] is False


def test_Q_escapes(cfg):
    n = 16
    Q = make_Q(2, 2, n)
    for s, r in zip([0.25, 0.5, 0.75], s_norms(Q, [0.25, 0.5, 0.75], cfg)):
        gap = exact_s_norm_Q(s, 2) - r.value
        assert gap == pytest.approx((s**2 - s**3) / n, abs=1e-9)
        assert escape_index(r.witness) == n
    assert sup_norm(Q, cfg).value == pytest.approx(2, abs=1e-9)


def test_verify_Q(cfg):
    rep = verify_Q(2, 2, 16, cfg, seeds=(0, 1))
    assert rep["passed"], rep["clauses"]


def test_Q_on_l3(cfg):
    rep = verify_Q(3, 3, 8, cfg, seeds=(0,))
    assert rep["passed"], rep["clauses"]


def test_fN(cfg):
    sp = LpSpace(3, 2)
    with pytest.raises(NotUnitFunctional):
        make_fN(Functional(np.array([1, 1, 0]), sp), 2)
    rep = verify_fN(2, 3, 4, cfg)
    assert rep["passed"]
    assert rep["v_norm"] == pytest.approx(delta_N(3), abs=1e-6)


def test_truncation_diagnostic():
    TruncationDiagnostic(4, 0.1, 4)
    with pytest.raises(OutOfDomain):
        TruncationDiagnostic(4, 0.1, 5)


def test_escape_index_and_axis_distance():
    x = np.array([0.1, -0.5j, 0.2])
    assert escape_index(x) == 2
    assert axis_distance(x, 1, 0.5, 2) == pytest.approx(np.hypot(0.1, 0.2))
