r"""Ritz solver for the regular q-fractional Sturm--Liouville problem

.. math::

    D^\alpha_{q,a-}\bigl(p\,{}^cD^\alpha_{q,0+} y\bigr) + r y = \lambda w y,
    \qquad y(0) = y(a) = 0.

Trial functions are ``y = w^{-1/2} \sum_k \beta_k \mu_k^{-1/2} S_q(w_k x / a)``.
The orthogonality of the ``S_q`` basis turns the normalisation constraint into
``(a sqrt(q) / 2) |beta|^2 = 1``, so the constrained minimisation reduces to a
single symmetric eigenproblem for ``(2 / (a sqrt q)) K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Sequence, Union

import numpy as np

from ._summation import csum
from .eigensolve import SymMatrix, jacobi_eigs
from .exprparse import Expr, ExprEvalError, evaluate_array, parse
from .qcore import LatticeFn, QLattice, dq, jackson_int
from .qfrac import _alpha, dleft_caputo, dright_rl
from .qspecial import TrigBasis

DEGENERACY_RTOL = 1e-8
MONOTONE_SLACK = 1e-10
RESIDUAL_TOL = 1e-4

Coefficient = Union[Expr, str, float, Callable]


class ProblemError(ValueError):
    """An SLProblem violates one of its hypotheses."""


def _coefficient_fn(c: Coefficient, lattice: QLattice) -> Callable:
    if isinstance(c, str):
        c = parse(c)
    if isinstance(c, (int, float)):
        value = float(c)
        return lambda x: np.full(np.shape(x), value)
    if callable(c):
        return lambda x: np.asarray(c(np.asarray(x, dtype=float)), dtype=float) * np.ones(np.shape(x))
    env = {"q": lattice.q, "a": lattice.a}
    return lambda x: evaluate_array(c, np.asarray(x, dtype=float), env)


def _bounded_tail(v: np.ndarray) -> bool:
    """Finite, and the deepest quarter does not dwarf the upper half."""
    if not np.all(np.isfinite(v)):
        return False
    n = len(v)
    upper = float(np.max(np.abs(v[: n // 2])))
    deep = float(np.max(np.abs(v[3 * n // 4 :])))
    return deep <= 1e3 * (1.0 + upper)


@dataclass(frozen=True, eq=False)
class SLProblem:
    """Coefficients ``p, r, w``, order ``alpha`` in (1/2, 1] and the lattice."""

    lattice: QLattice
    alpha: float
    p: Coefficient = 1.0
    r: Coefficient = 0.0
    w: Coefficient = 1.0

    def __post_init__(self):
        al = _alpha(self.alpha)
        if al <= 0.5:
            raise ProblemError(f"alpha must exceed 1/2, got {al}")
        object.__setattr__(self, "alpha", al)
        try:
            p, r, w = self.coefficients()
        except (ExprEvalError, ZeroDivisionError, FloatingPointError) as exc:
            raise ProblemError(f"coefficient cannot be sampled: {exc}") from exc
        depth = self.lattice.depth
        if not np.all(np.isfinite(p.values)) or np.min(p.values[:depth]) <= 0 or p.zero_value <= 0:
            raise ProblemError("p must be positive on the lattice")
        if np.min(w.values[:depth]) <= 0 or w.zero_value <= 0:
            raise ProblemError("w must be positive on the lattice")
        if not _bounded_tail((r.values / w.values)[:depth]):
            raise ProblemError("r / w is unbounded near 0")
        inv = LatticeFn(self.lattice, 1.0 / w.values, 1.0 / w.zero_value)
        x = self.lattice.nodes
        size = float(np.max(np.abs(inv.values)))
        for k in range(3):
            # rounding in k-th differences grows like eps / x^k; judge only
            # the nodes where it stays below one
            noise = 2.0**k * np.finfo(float).eps * size / ((1.0 - self.lattice.q) * x) ** k
            keep = np.flatnonzero(noise[: depth - k] <= 1.0)
            if len(keep) < 8 or not _bounded_tail(inv.values[keep]):
                raise ProblemError(f"D_q^{k}(1/w) is unbounded near 0")
            inv = dq(inv)

    def coefficients(self):
        """``(p, r, w)`` sampled on the lattice."""
        return self._coefficient_samples

    @cached_property
    def _coefficient_samples(self):
        out = []
        for c in (self.p, self.r, self.w):
            fn = _coefficient_fn(c, self.lattice)
            out.append(LatticeFn.sample(self.lattice, fn, extend=False))
        return tuple(out)


@dataclass(frozen=True, eq=False)
class Spectrum:
    lambdas: np.ndarray
    betas: np.ndarray
    basis: TrigBasis
    m: int
    problem: SLProblem
    degenerate: bool = False

    def eigenfunction(self, n: int) -> LatticeFn:
        """``y^(n)`` (1-based) on the lattice."""
        return combine(self.betas[n - 1], self.problem, self.basis)

    def residuals(self) -> np.ndarray:
        return np.array([strong_residual(self, n) for n in range(1, len(self.lambdas) + 1)])


@dataclass(frozen=True, eq=False)
class SweepTable:
    m_list: List[int]
    lambdas: np.ndarray
    monotone: bool
    increments: np.ndarray
    violations: List[str] = field(default_factory=list)

    @property
    def estimate(self) -> np.ndarray:
        return self.lambdas[-1]


def trig_basis(prob: SLProblem, m: int) -> TrigBasis:
    return TrigBasis.build(prob.lattice, m, k_max=max(m, 8))


def basis_fn(k: int, prob: SLProblem, basis: TrigBasis = None) -> LatticeFn:
    """``S_q(w_k x / a) / sqrt(w(x))``; vanishes at 0 and at ``a``."""
    basis = trig_basis(prob, k) if basis is None else basis
    _, _, w = prob.coefficients()
    if np.any(w.values <= 0):
        raise ProblemError("w must be positive at every node")
    s = basis.sine_nodes(k)
    vals = s / np.sqrt(w.values)
    return LatticeFn(prob.lattice, vals, 0.0, None, vals)


def _integrate_products(lat: QLattice, left: np.ndarray, right: np.ndarray, zl, zr) -> np.ndarray:
    """Jackson integrals of every row product ``left[i] * right[j]``."""
    wts = lat.weights
    tail = lat.tail_mass
    out = np.empty((left.shape[0], right.shape[0]))
    for i in range(left.shape[0]):
        for j in range(right.shape[0]):
            out[i, j] = csum(np.append(wts * left[i] * right[j], tail * zl[i] * zr[j]))
    return out


def assemble_stiffness(m: int, prob: SLProblem, basis: TrigBasis = None) -> SymMatrix:
    """Energy form in the normalised basis, symmetrised."""
    basis = trig_basis(prob, m) if basis is None else basis
    if m > basis.K:
        raise ValueError("m exceeds the basis size")
    lat = prob.lattice
    p, r, w = prob.coefficients()
    phis = [basis_fn(k, prob, basis) for k in range(1, m + 1)]
    ders = [dleft_caputo(phi, prob.alpha) for phi in phis]
    dv = np.array([d.values for d in ders])
    dz = np.array([d.zero_value for d in ders])
    sv = np.array([basis.sine_nodes(k) for k in range(1, m + 1)])
    energy = _integrate_products(lat, dv * p.values, dv, dz * p.zero_value, dz)
    potential = _integrate_products(lat, sv * (r.values / w.values), sv, np.zeros(m), np.zeros(m))
    scale = 1.0 / np.sqrt(np.outer(basis.mu[:m], basis.mu[:m]))
    dense = (energy + potential) * scale
    return SymMatrix.from_dense(0.5 * (dense + dense.T))


def spectrum(m: int, n_eigs: int, prob: SLProblem, basis: TrigBasis = None) -> Spectrum:
    """Lowest ``n_eigs`` Ritz eigenvalues with ``m`` basis functions."""
    if not 1 <= n_eigs <= m:
        raise ValueError("need 1 <= n_eigs <= m")
    basis = trig_basis(prob, m) if basis is None else basis
    lat = prob.lattice
    factor = 2.0 / (lat.a * math.sqrt(lat.q))
    K = assemble_stiffness(m, prob, basis)
    lam, vecs = jacobi_eigs(SymMatrix(K.dim, K.entries * factor))
    betas = (vecs[:, :n_eigs] * math.sqrt(factor)).T
    # fix the sign so the leading nonzero coefficient is positive
    for row in betas:
        lead = row[np.argmax(np.abs(row) > 1e-12 * np.max(np.abs(row)))]
        if lead < 0:
            row *= -1.0
    lam = lam[:n_eigs]
    gaps = np.diff(lam)
    degenerate = bool(np.any(gaps <= DEGENERACY_RTOL * max(abs(lam[0]), 1e-300)))
    return Spectrum(lam.copy(), betas, basis, m, prob, degenerate)


def combine(beta: Sequence[float], prob: SLProblem, basis: TrigBasis) -> LatticeFn:
    """``w^{-1/2} sum_k beta_k mu_k^{-1/2} S_q(w_k x / a)``."""
    _, _, w = prob.coefficients()
    total = np.zeros(prob.lattice.size)
    for k, b in enumerate(beta, 1):
        total = total + (b / math.sqrt(basis.mu[k - 1])) * basis.sine_nodes(k)
    vals = total / np.sqrt(w.values)
    return LatticeFn(prob.lattice, vals, 0.0, None, vals)


def strong_residual(spec: Spectrum, n: int) -> float:
    """Sup over the nodes below ``a`` of ``D(p cD y) + r y - lambda w y`` for ``y^(n)``."""
    prob = spec.problem
    p, r, w = prob.coefficients()
    y = spec.eigenfunction(n)
    flux = dleft_caputo(y, prob.alpha) * p
    lhs = dright_rl(flux, prob.alpha).values
    res = lhs + (r.values - spec.lambdas[n - 1] * w.values) * y.values
    return float(np.max(np.abs(res[1 : prob.lattice.depth])))


def weighted_gram(spec: Spectrum) -> np.ndarray:
    """``int w y^(i) y^(j) d_q x`` for the computed eigenfunctions."""
    _, _, w = spec.problem.coefficients()
    ys = np.array([spec.eigenfunction(n).values for n in range(1, len(spec.lambdas) + 1)])
    k = len(ys)
    return _integrate_products(spec.problem.lattice, ys * w.values, ys, np.zeros(k), np.zeros(k))


def convergence_sweep(m_list: Sequence[int], n_eigs: int, prob: SLProblem) -> SweepTable:
    """Ritz eigenvalues for each ``m``; checks that they never increase with ``m``."""
    m_list = [int(m) for m in m_list]
    if m_list != sorted(m_list) or len(set(m_list)) != len(m_list):
        raise ValueError("m_list must be strictly ascending")
    basis = trig_basis(prob, m_list[-1])
    # rows with m < n_eigs are padded with nan
    table = np.full((len(m_list), n_eigs), np.nan)
    for i, m in enumerate(m_list):
        lam = spectrum(m, min(m, n_eigs), prob, basis).lambdas
        table[i, : len(lam)] = lam
    violations = []
    for i in range(1, len(m_list)):
        for n in range(n_eigs):
            prev, cur = table[i - 1, n], table[i, n]
            if np.isnan(prev):
                continue
            if cur > prev + MONOTONE_SLACK * max(1.0, abs(prev)):
                violations.append(f"lambda^({n + 1}) rose from {prev!r} (m={m_list[i - 1]}) to {cur!r} (m={m_list[i]})")
    increments = np.abs(np.diff(table, axis=0)) if len(m_list) > 1 else np.zeros((0, n_eigs))
    return SweepTable(m_list, table, not violations, increments, violations)
