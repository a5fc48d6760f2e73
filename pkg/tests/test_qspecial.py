import math
import sys

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import mp_ml, mp_mu, mp_trig, mp_zero
from qfracsl.identities import check_derivative_relations, check_mittag_leffler, check_orthogonality
from qfracsl.qcore import QLattice, qgamma, qpoch_finite
from qfracsl.qspecial import (
    TrigBasis,
    ml_E,
    ml_e,
    mu_k,
    q_cos,
    q_sin,
    q_sin_extended,
    q_sin_prime,
    sq_zeros,
)


def test_sin_cos_basics():
    q = 0.5
    assert q_sin(0.0, q) == 0.0
    assert q_cos(0.0, q) == 1.0
    assert q_sin_prime(0.0, q) == pytest.approx(1 / (1 - q), rel=1e-15)
    z = np.linspace(0.1, 5, 17)
    assert np.array_equal(q_sin(-z, q), -q_sin(z, q))
    assert np.array_equal(q_cos(-z, q), q_cos(z, q))


def test_sin_small_argument():
    q, z = 0.5, 0.1
    three = z / (1 - q) - q**1.5 * z**3 / qpoch_finite(q, 3, q) + q**5 * z**5 / qpoch_finite(q, 5, q)
    omitted = q**10.5 * z**7 / qpoch_finite(q, 7, q)
    assert abs(q_sin(z, q) - three) <= omitted


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("z", [0.3, 1.0, 2.7, 4.1])
def test_series_match_oracle(q, z):
    # double-precision series lose digits to cancellation as q approaches 1
    rel = 1e-12 if q < 0.6 else 1e-10
    assert q_sin(z, q) == pytest.approx(float(mp_trig(z, q, "S")), rel=rel, abs=1e-14)
    assert q_cos(z, q) == pytest.approx(float(mp_trig(z, q, "C")), rel=rel, abs=1e-14)
    assert q_sin_prime(z, q) == pytest.approx(float(mp_trig(z, q, "dS")), rel=rel, abs=1e-14)


def test_sin_prime_central_difference():
    q, h = 0.5, 1e-6
    fd = (q_sin(1 + h, q) - q_sin(1 - h, q)) / (2 * h)
    assert abs(fd - q_sin_prime(1.0, q)) <= 1e-8


def test_overflow_flagged():
    with pytest.raises(OverflowError):
        q_sin(1e200, 0.99)


def test_first_zero_dense_scan():
    q = 0.5
    z = np.arange(1, 100001) * 1e-4
    s = q_sin(z, q)
    i = int(np.argmax(s[1:] * s[:-1] < 0))
    lo, hi = z[i], z[i + 1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if (q_sin(mid, q) > 0) == (q_sin(lo, q) > 0):
            lo = mid
        else:
            hi = mid
    assert sq_zeros(q, 1)[0] == pytest.approx(lo, rel=1e-13)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_zeros_match_oracle(q):
    w = sq_zeros(q, 6)
    assert np.all(np.diff(w) > 0)
    for wk in w:
        assert wk == pytest.approx(float(mp_zero(wk, q)), rel=1e-13)
        assert abs(q_sin(wk, q)) <= 1e-12 * abs(wk * q_sin_prime(wk, q))


def test_zeros_interlace_derivative_signs():
    w = sq_zeros(0.5, 8)
    signs = np.sign(q_sin_prime(w, 0.5))
    assert np.all(signs[1:] == -signs[:-1])


def test_zeros_limits():
    with pytest.raises(ValueError):
        sq_zeros(0.5, 9)
    with pytest.raises(ValueError):
        sq_zeros(0.5, 0)
    assert len(sq_zeros(0.5, 12, k_max=12)) == 12


@pytest.mark.parametrize("q,K", [(0.3, 8), (0.5, 12), (0.8, 12)])
def test_mu_matches_oracle(q, K):
    basis = TrigBasis.build(QLattice(q), K, k_max=K)
    for k in range(K):
        w = mp_zero(basis.w[k], q)
        assert basis.mu[k] > 0
        assert basis.mu[k] == pytest.approx(float(mp_mu(w, q)), rel=1e-12)
    assert mu_k(basis.w[0], q) == pytest.approx(basis.mu[0], rel=1e-14)


def test_mu_growth_bounded():
    q = 0.5
    mu = TrigBasis.build(QLattice(q), 12, k_max=12).mu
    k = np.arange(1, 13)
    # consistent with mu_k = O(q^{-2 k^2}): log mu_k / k^2 stays bounded
    assert np.all(np.log(mu) / k**2 <= -2 * math.log(q))


def test_basis_tables_match_oracle():
    q = 0.5
    lat = QLattice(q)
    basis = TrigBasis.build(lat, 10, k_max=10)
    for k in (1, 5, 10):
        w = mp_zero(basis.w[k - 1], q)
        for n in (0, 1, 3, 10, 40):
            with mpmath.workdps(200):
                x = mpmath.mpf(q) ** n
                sin = float(mp_trig(w * x, q, "S"))
                cos = float(mp_trig(mpmath.sqrt(q) * w * x, q, "C"))
            assert basis.sine_nodes(k)[n] == pytest.approx(sin, rel=1e-12, abs=1e-15)
            assert basis.cosine_nodes(k, "sqrt")[n] == pytest.approx(cos, rel=1e-12, abs=1e-15)
    with mpmath.workdps(200):
        sin = float(mp_trig(mp_zero(basis.w[1], q) * mpmath.mpf(0.37), q, "S"))
    assert basis.sine(2, 0.37) == pytest.approx(sin, rel=1e-12)
    with pytest.raises(IndexError):
        basis.sine_nodes(11)


def test_sin_extended_at_zero():
    w = sq_zeros(0.5, 4)
    for wk in w:
        assert abs(q_sin_extended(wk, 0.5)) <= 1e-12 * abs(wk * q_sin_prime(wk, 0.5))


@pytest.mark.parametrize("q", [0.3, 0.5])
def test_derivative_relations(q):
    for c in check_derivative_relations(QLattice(q)):
        assert c.passed, c


def test_orthogonality_and_gram(lattice):
    for c in check_orthogonality(lattice, 5):
        assert c.passed, c


# -- Mittag-Leffler ---------------------------------------------------------------


def test_ml_basics():
    assert ml_e(0.7, 0.0, 0.5) == 1.0
    assert ml_E(0.7, 0.0, 0.5) == 1.0
    brute = sum(0.5**n / qgamma(n + 1, 0.5) for n in range(60))
    assert ml_e(1.0, 0.5, 0.5) == pytest.approx(brute, rel=1e-14)
    with pytest.raises(ValueError):
        ml_e(0.75, 1.2 / 0.5**0.75, 0.5)


@pytest.mark.parametrize("alpha", [0.6, 0.75, 0.9])
@pytest.mark.parametrize("z", [0.05, 0.7, 1.4])
def test_ml_match_oracle(alpha, z):
    q = 0.5
    assert ml_e(alpha, z, q) == pytest.approx(float(mp_ml(alpha, z, q)), rel=1e-13)
    assert ml_E(alpha, z, q) == pytest.approx(float(mp_ml(alpha, z, q, damped=True)), rel=1e-13)
    assert ml_E(alpha, 3 * z, q) == pytest.approx(float(mp_ml(alpha, 3 * z, q, damped=True)), rel=1e-13)


def test_ml_offsets():
    assert ml_e(0.75, 0.3, 0.5, start=1) == pytest.approx(ml_e(0.75, 0.3, 0.5) - 1, rel=1e-14)
    assert ml_E(0.75, 1e-9, 0.5, start=1) == pytest.approx(1e-9 / qgamma(1.75, 0.5), rel=1e-8)


def test_ml_small_argument_agreement():
    al, q = 0.75, 0.5
    for z in (1e-3, 1e-2):
        bound = 2 * z**2 / qgamma(2 * al + 1, q)
        assert abs(ml_e(al, z, q) - ml_E(al, z, q)) <= bound


@pytest.mark.parametrize("alpha", [0.6, 0.75, 0.9])
def test_lsd_identities(alpha):
    for c in check_mittag_leffler(QLattice(0.5), alpha):
        assert c.passed, c


@settings(max_examples=25, deadline=None)
@given(z=st.floats(0.01, 6.0), q=st.floats(0.2, 0.85))
def test_sin_cos_property(z, q):
    assert math.isclose(q_sin(-z, q), -q_sin(z, q))
    # a double-precision series sum cannot beat eps times its largest term
    with mpmath.workdps(60):
        mq = mpmath.mpf(q)
        big = max(
            abs(mq ** (n * (n + mpmath.mpf(0.5))) * mpmath.mpf(z) ** (2 * n + 1) / mpmath.qp(mq, mq, 2 * n + 1))
            for n in range(200)
        )
    slack = 8 * sys.float_info.epsilon * float(big)
    assert math.isclose(q_sin(z, q), float(mp_trig(z, q, "S", 60)), rel_tol=1e-10, abs_tol=1e-12 + slack)
