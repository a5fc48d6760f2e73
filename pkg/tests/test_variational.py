import math

import mpmath
import numpy as np
import pytest

from qfracsl.qcore import LatticeFn, QLattice, qgamma
from qfracsl.qfrac import ileft
from qfracsl.qspecial import TrigBasis
from qfracsl.ritz import SLProblem
from qfracsl.variational import (
    BoundaryError,
    Functional,
    el_residual,
    example_undamped,
    example_damped,
    isoperimetric_residual,
    rayleigh,
    weak_residual,
)

ZERO = lambda x, y, v: np.zeros_like(x)  # noqa: E731


def test_trivial_residual(lat05):
    F = Functional(d2F=lambda x, y, v: 2 * y, d3F=ZERO, description="F = y^2")
    res = el_residual(F, LatticeFn.constant(lat05, 0.0), 0.75)
    assert res.sup() == 0.0


def test_constant_derivative_residual(lat05):
    al, q = 0.75, 0.5
    # cD^alpha of x^alpha / Gamma_q(alpha + 1) is 1, so the residual is D^alpha_{a-} 1
    y = ileft(LatticeFn.constant(lat05, 1.0), al)
    F = Functional(d2F=ZERO, d3F=lambda x, y, v: v, description="F = v^2 / 2")
    res = el_residual(F, y, al, boundary=None)
    mq = mpmath.mpf(q)

    def right_int_one(n):
        # I^{1-alpha}_{a-} 1 at a q^n by its defining node sum
        b = 1 - al
        s = sum(
            (1 - mq) * mq**m * (mq**m) ** (b - 1) * mpmath.qp(mq ** (n - m + 1), mq) / mpmath.qp(mq ** (n - m + b), mq)
            for m in range(n + 1)
        )
        return s / mpmath.qgamma(b, mq)

    for n in (1, 2, 5):
        x = mq**n
        expected = -(1 / mq) * (right_int_one(n - 1) - right_int_one(n)) / ((1 - mq) * x / mq)
        assert res.values[n] == pytest.approx(float(expected), rel=1e-9)


def test_boundary_violation(lat05):
    F = Functional(d2F=ZERO, d3F=lambda x, y, v: 2 * v)
    with pytest.raises(BoundaryError):
        el_residual(F, LatticeFn.sample(lat05, lambda x: x), 0.75)


@pytest.mark.parametrize("alpha", [0.6, 0.75, 0.9])
def test_worked_examples(lat05, alpha):
    for build in (example_undamped, example_damped):
        ex = build(lat05, alpha)
        assert ex.lam == 2.0
        assert ex.residual().scaled_sup() <= 1e-7


def test_wrong_multiplier_detected(lat05):
    for build in (example_undamped, example_damped):
        ex = build(lat05, 0.75)
        assert ex.residual(2.001).scaled_sup() > 1e-6


def test_undamped_domain():
    with pytest.raises(ValueError):
        example_undamped(QLattice(0.5, a=2.0), 0.75)


def test_isoperimetric_reduces_to_el(lat05):
    ex = example_damped(lat05, 0.75)
    a = isoperimetric_residual(ex.F, ex.F, 0.0, ex.y, 0.75)
    b = el_residual(ex.F, ex.y, 0.75, boundary=None)
    assert np.array_equal(a.values, b.values)


def test_residual_excludes_node_a(lat05):
    res = example_damped(lat05, 0.75).residual()
    assert len(res.reported()) == lat05.depth - 1
    assert math.isfinite(res.at_a)


@pytest.mark.parametrize("build", [example_undamped, example_damped])
def test_weak_residual_small(lat05, build):
    res = build(lat05, 0.75).residual()
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = rng.normal(size=3)
        h = LatticeFn.sample(lat05, lambda x: x * (1 - x) * np.polyval(c, x), extend=False)
        norm = math.sqrt(float(np.sum(lat05.weights * h.values**2)))
        assert abs(weak_residual(res, h)) <= 1e-7 * norm


# -- Rayleigh quotient ------------------------------------------------------------


def test_rayleigh_homogeneous(lat05):
    prob = SLProblem(lat05, 0.75)
    y = LatticeFn.sample(lat05, lambda x: x * (1 - x) * (1 + x), extend=False)
    r = rayleigh(y, prob)
    for c in (7.0, -0.3, 1e5):
        assert rayleigh(y * c, prob) == pytest.approx(r, rel=1e-14)


def test_rayleigh_integer_case(lat05):
    prob = SLProblem(lat05, 1.0)
    basis = TrigBasis.build(lat05, 1)
    y = LatticeFn(lat05, basis.sine_nodes(1), 0.0)
    w = basis.w[0]
    expected = w**2 / (math.sqrt(0.5) * (1 - 0.5) ** 2)
    assert rayleigh(y, prob) == pytest.approx(expected, rel=1e-10)


def test_rayleigh_bounded_below(lat05):
    prob = SLProblem(lat05, 0.75, r="3 + x", w="1 + x")
    r_over_w = (3 + lat05.nodes) / (1 + lat05.nodes)
    rng = np.random.default_rng(2)
    for _ in range(10):
        c = rng.normal(size=3)
        y = LatticeFn.sample(lat05, lambda x: x * (1 - x) * np.polyval(c, x), extend=False)
        assert rayleigh(y, prob) >= r_over_w.min()


def test_rayleigh_errors(lat05):
    prob = SLProblem(lat05, 0.75)
    with pytest.raises(ZeroDivisionError):
        rayleigh(LatticeFn.constant(lat05, 0.0), prob)
    with pytest.raises(BoundaryError):
        rayleigh(LatticeFn.sample(lat05, lambda x: x, extend=False), prob)


def test_lsd_consistency_of_example_solution(lat05):
    # the undamped extremal has cD^alpha y = y, so y(0) = 1
    ex = example_undamped(lat05, 0.75)
    assert ex.y.zero_value == 1.0
    assert ex.y.values[0] > qgamma(1.75, 0.5) ** -1
