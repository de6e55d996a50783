import math

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp

from expmhd.epirk import (EPIRK4, EPIRK5P1, EPIRK5P1_DECIMALS, EpiRKTableau,
                          StepController, StiffnessFailure, epirk4_step,
                          epirk5p1_step, epirk_tableau_step,
                          integrate_adaptive, integrate_fixed, remainder)
from expmhd.fdjac import FdJacobianOperator
from expmhd.krylov import LinearOperator

rng = np.random.default_rng(19)


def brusselator(y):
    # classic stiff-ish nonlinear test system
    a, b = 1.0, 3.0
    return np.array([a + y[0] ** 2 * y[1] - (b + 1.0) * y[0],
                     b * y[0] - y[0] ** 2 * y[1]])


def brusselator_reference(y0, t_end):
    sol = solve_ivp(lambda t, y: brusselator(y), (0.0, t_end), y0,
                    method="Radau", rtol=1e-12, atol=1e-13)
    return sol.y[:, -1]


def observed_order(method, rhs, y0, t_end, y_ref, h0, halvings):
    errs = []
    for i in range(halvings + 1):
        h = h0 / 2 ** i
        y, _ = integrate_fixed(method, rhs, y0, 0.0, t_end, h,
                               tol_krylov=1e-13)
        errs.append(np.linalg.norm(y - y_ref))
    slopes = [math.log2(errs[i] / errs[i + 1]) for i in range(halvings)]
    return errs, np.mean(slopes)


# ----------------------------------------------------------- coefficients

def test_tableau_decimals_verbatim():
    assert EPIRK5P1_DECIMALS["a11"] == "0.35129592695058193092"
    assert EPIRK5P1_DECIMALS["a21"] == "0.84405472011657126298"
    assert EPIRK5P1_DECIMALS["a22"] == "1.6905891609568963624"
    assert EPIRK5P1_DECIMALS["b1"] == "1.0"
    assert EPIRK5P1_DECIMALS["b2"] == "1.2727127317356892397"
    assert EPIRK5P1_DECIMALS["b3"] == "2.2714599265422622275"
    assert EPIRK5P1_DECIMALS["g11"] == "0.35129592695058193092"
    assert EPIRK5P1_DECIMALS["g21"] == "0.84405472011657126298"
    assert EPIRK5P1_DECIMALS["g22"] == "0.5"
    assert EPIRK5P1_DECIMALS["g31"] == "1.0"
    assert EPIRK5P1_DECIMALS["g32"] == "0.71111095364366870359"
    assert EPIRK5P1_DECIMALS["g33"] == "0.62378111953371494809"


def test_tableau_instances_match_declared_decimals():
    c = {k: float(v) for k, v in EPIRK5P1_DECIMALS.items()}
    assert EPIRK5P1.a[0][0] == c["a11"]
    assert EPIRK5P1.a[1] == [c["a21"], c["a22"]]
    assert EPIRK5P1.a[2] == [c["b1"], c["b2"], c["b3"]]
    assert EPIRK5P1.g[2] == [c["g31"], c["g32"], c["g33"]]
    assert EPIRK4.g[0][0] == 0.5
    assert EPIRK4.g[1][0] == 2.0 / 3.0


def test_tableau_rejects_g_outside_unit_interval():
    with pytest.raises(ValueError):
        EpiRKTableau(s=1, a=[[1.0]], g=[[1.5]], p=[[{1: 1.0}]])


# -------------------------------------------------------------- remainder

def test_remainder_vanishes_at_base_point():
    y_n = np.array([1.0, 2.0])
    f_n = brusselator(y_n)
    jop = FdJacobianOperator(brusselator, y_n, f_n)
    assert np.all(remainder(brusselator, y_n, f_n, jop, y_n) == 0.0)


def test_remainder_quadratic_example():
    # F(y) = y^2 scalar: R(y) = y^2 - y_n^2 - 2 y_n (y - y_n) = (y - y_n)^2
    def f(y):
        return y ** 2

    y_n = np.array([1.0])
    f_n = f(y_n)
    jop = FdJacobianOperator(f, y_n, f_n)
    r = remainder(f, y_n, f_n, jop, np.array([1.1]))
    assert r[0] == pytest.approx(0.01, abs=1e-6)


# ------------------------------------------------------------- single step

def test_zero_rhs_steps_are_identity():
    rhs = lambda y: np.zeros_like(y)
    y0 = np.array([1.0, -2.0, 3.0])
    y1, corr, _ = epirk5p1_step(rhs, y0, 0.5, 1e-12)
    assert np.all(y1 == y0)
    assert np.all(corr == 0.0)
    y1, _ = epirk4_step(rhs, y0, 0.5, 1e-12)
    assert np.all(y1 == y0)


@pytest.mark.parametrize("step", ["epirk4", "epirk5p1"])
def test_linear_problem_exactness_with_exact_jacobian(step):
    # all remainder terms vanish analytically, so one step must reproduce
    # y + phi_1(hM) hMy to round-off
    n = 8
    M = rng.standard_normal((n, n))
    M = M / np.linalg.norm(M)
    y0 = rng.standard_normal(n)
    h = 0.7
    rhs = lambda y: M @ y
    jop = LinearOperator.from_matrix(M)
    want = scipy.linalg.expm(h * M) @ y0
    if step == "epirk4":
        y1, _ = epirk4_step(rhs, y0, h, 1e-12, jop=jop)
    else:
        y1, _, _ = epirk5p1_step(rhs, y0, h, 1e-12, jop=jop)
    assert np.linalg.norm(y1 - want) <= 1e-10 * np.linalg.norm(want)


@pytest.mark.parametrize("step", ["epirk4", "epirk5p1"])
def test_linear_problem_with_fd_jacobian(step):
    # the forward-difference Jacobian limits accuracy to O(sqrt(eps))
    n = 6
    M = rng.standard_normal((n, n)) / 3.0
    y0 = rng.standard_normal(n)
    h = 0.5
    rhs = lambda y: M @ y
    want = scipy.linalg.expm(h * M) @ y0
    if step == "epirk4":
        y1, _ = epirk4_step(rhs, y0, h, 1e-12)
    else:
        y1, _, _ = epirk5p1_step(rhs, y0, h, 1e-12)
    assert np.linalg.norm(y1 - want) <= 1e-6 * np.linalg.norm(want)


def test_projection_counts():
    y0 = np.array([1.0, 3.0])
    _, stats = epirk4_step(brusselator, y0, 0.05, 1e-10)
    assert stats.projections == 2
    _, _, stats = epirk5p1_step(brusselator, y0, 0.05, 1e-10)
    assert stats.projections == 3


def test_riccati_scalar_accuracy():
    # y' = y^2, y(0) = 1, exact solution 1/(1 - t)
    rhs = lambda y: y ** 2
    y0 = np.array([1.0])
    errs = []
    for h in (0.1, 0.05, 0.025, 0.0125):
        y, _ = integrate_fixed("epirk5p1", rhs, y0, 0.0, 0.5, h,
                               tol_krylov=1e-13)
        errs.append(abs(y[0] - 2.0))
    slopes = [math.log2(errs[i] / errs[i + 1]) for i in range(3)]
    assert np.mean(slopes) >= 4.5


def test_step_rejects_nonpositive_h():
    with pytest.raises(ValueError):
        epirk4_step(brusselator, np.array([1.0, 1.0]), 0.0, 1e-8)
    with pytest.raises(ValueError):
        epirk5p1_step(brusselator, np.array([1.0, 1.0]), -0.1, 1e-8)


# --------------------------------------------------------- fixed-step order

def test_epirk4_order_at_least_3p8():
    y0 = np.array([1.5, 3.0])
    y_ref = brusselator_reference(y0, 2.0)
    errs, slope = observed_order("epirk4", brusselator, y0, 2.0, y_ref,
                                 h0=0.25, halvings=4)
    assert errs[0] > errs[-1]
    assert slope >= 3.8


def test_epirk5p1_order_at_least_4p7():
    y0 = np.array([1.5, 3.0])
    y_ref = brusselator_reference(y0, 2.0)
    errs, slope = observed_order("epirk5p1", brusselator, y0, 2.0, y_ref,
                                 h0=0.25, halvings=4)
    assert slope >= 4.7


def test_generic_tableau_matches_specialized_steppers():
    y0 = np.array([1.5, 3.0, 0.5])

    def rhs(y):
        return np.array([-y[0] + y[1] * y[2],
                         y[0] - y[1] ** 2,
                         y[0] * y[1] - 2.0 * y[2]])

    h = 0.1
    y5, _, _ = epirk5p1_step(rhs, y0, h, 1e-13)
    yt, _ = epirk_tableau_step(EPIRK5P1, rhs, y0, h, 1e-13)
    assert np.linalg.norm(y5 - yt) <= 1e-12 * np.linalg.norm(y5)

    # the merged phi_3/phi_4 projection and the per-term projections agree
    # to the Krylov tolerance, amplified by the O(100) remainder weights
    y4, _ = epirk4_step(rhs, y0, h, 1e-13)
    yt, _ = epirk_tableau_step(EPIRK4, rhs, y0, h, 1e-13)
    assert np.linalg.norm(y4 - yt) <= 1e-10 * np.linalg.norm(y4)


# ------------------------------------------------------------- integrators

def test_integrate_fixed_clips_last_step():
    rhs = lambda y: -y
    y, stats = integrate_fixed("epirk4", rhs, np.array([1.0]), 0.0, 1.0, 0.3)
    assert stats.steps_accepted == 4
    assert y[0] == pytest.approx(math.exp(-1.0), rel=1e-6)


def test_integrate_fixed_validates_arguments():
    rhs = lambda y: -y
    with pytest.raises(ValueError):
        integrate_fixed("epirk4", rhs, np.ones(1), 1.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        integrate_fixed("rk9", rhs, np.ones(1), 0.0, 1.0, 0.1)


def test_adaptive_zero_rhs_single_step():
    rhs = lambda y: np.zeros_like(y)
    y0 = np.array([4.0, -1.0])
    ctl = StepController(tol=1e-6, h_init=2.0)
    y, stats = integrate_adaptive(rhs, y0, 0.0, 1.0, ctl)
    assert np.all(y == y0)
    assert stats.steps_accepted == 1
    assert stats.steps_rejected == 0


def test_adaptive_meets_tolerance_on_stiff_linear():
    # y' = -1000 y + sin(t), made autonomous by carrying t as a component
    lam = -1000.0

    def rhs_aug(y):
        return np.array([lam * y[0] + math.sin(y[1]), 1.0])

    sol = solve_ivp(lambda t, y: [lam * y[0] + math.sin(t)], (0.0, 1.0),
                    [0.0], method="Radau", rtol=1e-12, atol=1e-14)
    want = sol.y[0, -1]
    prev_err = None
    for tol in (1e-4, 1e-6, 1e-8):
        ctl = StepController(tol=tol)
        y, stats = integrate_adaptive(rhs_aug, np.array([0.0, 0.0]), 0.0, 1.0,
                                      ctl)
        err = abs(y[0] - want)
        assert err <= 10.0 * tol
        if prev_err is not None:
            assert err <= 10.0 * prev_err    # tighter tol never much worse
        prev_err = err


def test_adaptive_counts_rejections():
    # start with a deliberately huge first step so the controller rejects
    def rhs(y):
        return np.array([y[0] ** 2])

    ctl = StepController(tol=1e-8, h_init=0.4)
    y, stats = integrate_adaptive(rhs, np.array([1.0]), 0.0, 0.5, ctl)
    assert y[0] == pytest.approx(2.0, abs=1e-6)
    assert stats.steps_rejected >= 1
    assert stats.steps_accepted >= 1


def test_adaptive_raises_stiffness_failure():
    def rhs(y):
        return np.array([y[0] ** 2])

    # blow-up at t = 1 inside the integration window: no step size works
    ctl = StepController(tol=1e-6, h_min=1e-3)
    with pytest.raises(StiffnessFailure) as info:
        integrate_adaptive(rhs, np.array([1.0]), 0.0, 2.0, ctl)
    assert info.value.t < 2.0
    assert info.value.h <= 1e-3 * (1.0 + 1e-9)


def test_adaptive_recoverable_rhs_guard():
    # a guard tripping inside a trial step should reject the step, not
    # abort the integration; without recoverable= it must propagate
    class Guard(ValueError):
        pass

    def make_rhs(trips):
        budget = {"n": trips}

        def rhs(y):
            if budget["n"] > 0:
                budget["n"] -= 1
                raise Guard("state out of bounds")
            return -y

        return rhs

    ctl = StepController(tol=1e-6)
    with pytest.raises(Guard):
        integrate_adaptive(make_rhs(2), np.array([1.0]), 0.0, 1.0, ctl)
    ctl = StepController(tol=1e-6)
    y, stats = integrate_adaptive(make_rhs(2), np.array([1.0]), 0.0, 1.0,
                                  ctl, recoverable=(Guard,))
    assert stats.steps_rejected >= 2
    assert abs(y[0] - np.exp(-1.0)) < 1e-4


def test_adaptive_recoverable_guard_at_h_min_raises():
    def rhs(y):
        raise ArithmeticError("always inadmissible")

    ctl = StepController(tol=1e-4, h_init=1e-3, h_min=1e-3)
    with pytest.raises(StiffnessFailure, match="rejected by the right"):
        integrate_adaptive(rhs, np.array([1.0]), 0.0, 1.0, ctl,
                           recoverable=(ArithmeticError,))
