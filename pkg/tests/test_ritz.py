import math

import numpy as np
import pytest

from qfracsl.qcore import QLattice
from qfracsl.ritz import (
    ProblemError,
    SLProblem,
    assemble_stiffness,
    basis_fn,
    combine,
    convergence_sweep,
    spectrum,
    strong_residual,
    trig_basis,
    weighted_gram,
)
from qfracsl.qspecial import TrigBasis
from qfracsl.variational import rayleigh


@pytest.fixture(scope="module")
def prob075():
    return SLProblem(QLattice(0.5), 0.75)


@pytest.fixture(scope="module")
def spec075(prob075):
    return spectrum(12, 4, prob075)


def closed_form(w, q, a):
    return w**2 / (math.sqrt(q) * a**2 * (1 - q) ** 2)


def test_problem_validation(lat05):
    with pytest.raises(ProblemError):
        SLProblem(lat05, 0.5)
    with pytest.raises(ValueError):
        SLProblem(lat05, 1.2)
    with pytest.raises(ProblemError):
        SLProblem(lat05, 0.75, p="x - 0.5")
    with pytest.raises(ProblemError):
        SLProblem(lat05, 0.75, w="0 * x")
    with pytest.raises(ProblemError):
        SLProblem(lat05, 0.75, r="1 / x")
    SLProblem(lat05, 0.75, p="1 + x^2", r="qcos(x)", w=lambda x: 2 + x)


def test_basis_fn(lat05):
    prob = SLProblem(lat05, 0.75, w="1 + x")
    basis = TrigBasis.build(lat05, 3)
    phi = basis_fn(2, prob, basis)
    assert abs(phi.values[0]) <= 1e-10 and phi.zero_value == 0.0
    direct = basis.sine(2, lat05.nodes[:10]) / np.sqrt(1 + lat05.nodes[:10])
    assert np.allclose(phi.values[:10], direct, rtol=1e-13, atol=1e-16)
    plain = basis_fn(2, SLProblem(lat05, 0.75), basis)
    assert np.array_equal(plain.values, basis.sine_nodes(2))


@pytest.mark.parametrize("q,a", [(0.5, 1.0), (0.3, 1.0), (0.5, 2.0)])
def test_integer_case_closed_form(q, a):
    prob = SLProblem(QLattice(q, a), 1.0)
    spec = spectrum(6, 4, prob)
    expected = closed_form(spec.basis.w[:4], q, a)
    assert np.allclose(spec.lambdas, expected, rtol=1e-8, atol=0)
    K = assemble_stiffness(6, prob, spec.basis).to_dense()
    off = K - np.diag(np.diag(K))
    assert np.max(np.abs(off) / np.sqrt(np.outer(np.diag(K), np.diag(K)))) <= 1e-8


def test_stiffness_symmetric(prob075):
    K = assemble_stiffness(5, prob075).to_dense()
    assert np.array_equal(K, K.T)


def test_one_dimensional_ritz_is_rayleigh(prob075):
    spec = spectrum(1, 1, prob075)
    y = basis_fn(1, prob075, spec.basis)
    assert spec.lambdas[0] == pytest.approx(rayleigh(y, prob075), rel=1e-8)


def test_ordering_and_orthonormality(spec075):
    lam = spec075.lambdas
    assert np.all(np.diff(lam) > 1e-8 * abs(lam[0]))
    assert not spec075.degenerate
    gram = weighted_gram(spec075)
    assert np.max(np.abs(gram - np.eye(4))) <= 1e-8


def test_rayleigh_of_eigenfunctions(spec075, prob075):
    for n in range(1, 4):
        lam = spec075.lambdas[n - 1]
        assert abs(rayleigh(spec075.eigenfunction(n), prob075) - lam) <= 1e-6 * abs(lam)


def test_rayleigh_minimality(spec075, prob075):
    rng = np.random.default_rng(11)
    lam1 = spec075.lambdas[0]
    for i in range(50):
        beta = rng.normal(size=12)
        if i % 2:
            beta = spec075.betas[0] + 10.0 ** (-i / 8) * beta
        y = combine(beta, prob075, spec075.basis)
        assert rayleigh(y, prob075) >= lam1 - 1e-6 * abs(lam1)


def test_bounded_below():
    lat = QLattice(0.5)
    prob = SLProblem(lat, 0.75, r="2 - x", w="1 + x")
    spec = spectrum(6, 2, prob)
    r_over_w = (2 - lat.nodes) / (1 + lat.nodes)
    assert spec.lambdas[0] >= r_over_w.min()


@pytest.mark.parametrize("c", [-1.0, 2.5])
def test_shift_covariance(prob075, c):
    lat = prob075.lattice
    base = spectrum(8, 4, prob075).lambdas
    shifted = spectrum(8, 4, SLProblem(lat, 0.75, r=c)).lambdas
    assert np.allclose(shifted - base, c, rtol=0, atol=1e-8)
    weighted = SLProblem(lat, 0.75, r=f"{c} * (1 + x)", w="1 + x")
    plain = SLProblem(lat, 0.75, w="1 + x")
    assert np.allclose(spectrum(6, 3, weighted).lambdas - spectrum(6, 3, plain).lambdas, c, atol=1e-8, rtol=0)


def test_sweep_monotone_and_stabilising(prob075):
    table = convergence_sweep([2, 4, 8, 12], 3, prob075)
    assert table.monotone and not table.violations
    first = table.lambdas[:, 0]
    assert np.all(np.diff(first) <= 1e-10 * np.abs(first[:-1]))
    inc = table.increments[:, 0]
    assert np.all(np.diff(inc) <= 0)
    assert np.isnan(table.lambdas[0, 2])
    assert table.estimate[0] == first[-1]


def test_sweep_integer_case_constant():
    prob = SLProblem(QLattice(0.5), 1.0)
    table = convergence_sweep([2, 4, 6], 2, prob)
    assert np.allclose(table.lambdas[:, 0], table.lambdas[0, 0], rtol=1e-12)


def test_sweep_rejects_unsorted(prob075):
    with pytest.raises(ValueError):
        convergence_sweep([4, 2], 1, prob075)


def test_spectrum_arguments(prob075):
    with pytest.raises(ValueError):
        spectrum(3, 4, prob075)
    spec = spectrum(4, 2, prob075)
    assert len(spec.lambdas) == 2 and np.all(np.diff(spec.lambdas) > 0)
    with pytest.raises(ValueError):
        assemble_stiffness(5, prob075, trig_basis(prob075, 4))


def test_integer_case_strong_residual():
    prob = SLProblem(QLattice(0.5), 1.0)
    spec = spectrum(6, 4, prob)
    for n in range(1, 5):
        assert strong_residual(spec, n) <= 1e-4 * (1 + spec.lambdas[n - 1])


def test_galerkin_orthogonality(spec075, prob075):
    # the strong residual is orthogonal to the trial space in the weak sense
    from qfracsl.qcore import LatticeFn, jackson_int
    from qfracsl.qfrac import dleft_caputo

    y = spec075.eigenfunction(1)
    lam = spec075.lambdas[0]
    for k in range(1, 13):
        phi = basis_fn(k, prob075, spec075.basis)
        energy = jackson_int(LatticeFn(prob075.lattice, dleft_caputo(y, 0.75).values * dleft_caputo(phi, 0.75).values, 0.0))
        mass = jackson_int(LatticeFn(prob075.lattice, y.values * phi.values, 0.0))
        assert abs(energy - lam * mass) <= 1e-10 * lam * math.sqrt(spec075.basis.mu[k - 1])
