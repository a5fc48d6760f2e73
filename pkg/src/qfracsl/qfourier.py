r"""Basic Fourier series on the symmetric q-linear grid ``{±a q^n}``.

Full series:

.. math::

    f \sim \frac{a_0}{2} + \sum_k a_k C_q(q^{1/2} w_k x / a) + b_k S_q(q w_k x / a),

with ``a_k = (1/(a mu_k)) int f C_q(...)`` and
``b_k = (sqrt(q)/(a mu_k)) int f S_q(...)`` over ``[-a, a]``.  Sine series of
functions with ``f(0) = f(a) = 0`` use ``S_q(w_k x / a)`` on ``[0, a]`` with
``c_k = (2/(a sqrt(q) mu_k)) int_0^a f S_q(w_k t / a) d_q t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .qcore import LatticeError, LatticeFn, QLattice, SymLatticeFn, jackson_int, jackson_int_sym
from .qspecial import TrigBasis

BOUNDARY_TOL = 1e-10
FIT_TOL = 0.05


class BoundaryError(ValueError):
    """A sine-series input does not vanish at 0 and at ``a``."""


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    a0: float
    a: np.ndarray
    b: np.ndarray
    basis: TrigBasis


@dataclass(frozen=True, eq=False)
class SineCoeffs:
    c: np.ndarray
    basis: TrigBasis


def _basis(lattice: QLattice, K: int, basis: Optional[TrigBasis]) -> TrigBasis:
    if basis is not None:
        if basis.K < K or basis.lattice != lattice:
            raise ValueError("supplied basis does not cover the request")
        return basis
    return TrigBasis.build(lattice, K, k_max=max(K, 8))


def fourier_coeffs(f: SymLatticeFn, K: int, basis: Optional[TrigBasis] = None) -> FourierCoeffs:
    """Coefficients ``a_0, a_k, b_k`` for ``k = 1..K``."""
    lat = f.lattice
    basis = _basis(lat, K, basis)
    a = lat.a
    a0 = jackson_int_sym(f) / a
    ak = np.empty(K)
    bk = np.empty(K)
    for k in range(1, K + 1):
        c = basis.cosine_nodes(k, "sqrt")
        s = basis.sine_nodes(k, "q")
        mu = basis.mu[k - 1]
        even = SymLatticeFn(lat, f.values_pos * c, f.values_neg * c, f.zero_value)
        odd = SymLatticeFn(lat, f.values_pos * s, -f.values_neg * s, 0.0)
        ak[k - 1] = jackson_int_sym(even) / (a * mu)
        bk[k - 1] = math.sqrt(lat.q) * jackson_int_sym(odd) / (a * mu)
    return FourierCoeffs(a0, ak, bk, basis)


def sine_coeffs(
    f: LatticeFn, K: int, basis: Optional[TrigBasis] = None, tol: float = BOUNDARY_TOL
) -> SineCoeffs:
    """Coefficients of the odd sine series of ``f`` on ``[0, a]``."""
    scale = 1.0 + float(np.max(np.abs(f.values)))
    if abs(f.zero_value) > tol * scale or abs(f.values[0]) > tol * scale:
        raise BoundaryError("sine series needs f(0) = f(a) = 0")
    lat = f.lattice
    basis = _basis(lat, K, basis)
    norm = 2.0 / (lat.a * math.sqrt(lat.q))
    c = np.array(
        [
            norm * jackson_int(f.with_values(f.values * basis.sine_nodes(k), 0.0)) / basis.mu[k - 1]
            for k in range(1, K + 1)
        ]
    )
    return SineCoeffs(c, basis)


Coeffs = Union[FourierCoeffs, SineCoeffs]


def synthesize(coeffs: Coeffs, x):
    """Partial sum of the series at ``x`` (scalar or array)."""
    basis = coeffs.basis
    if isinstance(coeffs, SineCoeffs):
        total = sum(ck * basis.sine(k, x) for k, ck in enumerate(coeffs.c, 1) if ck != 0.0)
        return total + 0.0 * np.asarray(x, dtype=float) if np.ndim(x) else float(total)
    total = coeffs.a0 / 2.0
    for k in range(1, len(coeffs.a) + 1):
        if coeffs.a[k - 1] != 0.0:
            total = total + coeffs.a[k - 1] * basis.cosine(k, x, "sqrt")
        if coeffs.b[k - 1] != 0.0:
            total = total + coeffs.b[k - 1] * basis.sine(k, x, "q")
    return total + 0.0 * np.asarray(x, dtype=float) if np.ndim(x) else float(total)


def synthesize_nodes(coeffs: Coeffs):
    """Partial sum on every node: a :class:`LatticeFn` for sine series, else symmetric."""
    basis = coeffs.basis
    lat = basis.lattice
    if isinstance(coeffs, SineCoeffs):
        vals = np.zeros(lat.size)
        for k, ck in enumerate(coeffs.c, 1):
            vals = vals + ck * basis.sine_nodes(k)
        return LatticeFn(lat, vals, 0.0, None, vals)
    even = np.full(lat.size, coeffs.a0 / 2.0)
    odd = np.zeros(lat.size)
    for k in range(1, len(coeffs.a) + 1):
        even = even + coeffs.a[k - 1] * basis.cosine_nodes(k, "sqrt")
        odd = odd + coeffs.b[k - 1] * basis.sine_nodes(k, "q")
    zero = coeffs.a0 / 2.0 + float(np.sum(coeffs.a))
    return SymLatticeFn(lat, even + odd, even - odd, zero)


def qmean_dist(f: SymLatticeFn, g: SymLatticeFn) -> float:
    """``sqrt(int_{-a}^{a} |f - g|^2 d_q x)``."""
    if f.lattice != g.lattice:
        raise LatticeError("functions live on different lattices")
    diff = SymLatticeFn(
        f.lattice,
        (f.values_pos - g.values_pos) ** 2,
        (f.values_neg - g.values_neg) ** 2,
        (f.zero_value - g.zero_value) ** 2,
    )
    return math.sqrt(jackson_int_sym(diff))


def _decay_data(coeffs) -> tuple:
    if isinstance(coeffs, SineCoeffs):
        vals = np.abs(coeffs.c)
    elif isinstance(coeffs, FourierCoeffs):
        vals = np.maximum(np.abs(coeffs.a), np.abs(coeffs.b))
    else:
        raise TypeError("expected SineCoeffs or FourierCoeffs")
    return vals * coeffs.basis.mu[: len(vals)], coeffs.basis.lattice.q


def decay_rate(weighted: np.ndarray, q: float) -> float:
    """Least-squares ``c`` in ``|mu_k coeff_k| ~ C q^{c k}``; ``inf`` when all vanish."""
    weighted = np.abs(np.asarray(weighted, dtype=float))
    if len(weighted) < 4:
        raise ValueError("need at least 4 coefficients to fit a decay rate")
    k = np.arange(1, len(weighted) + 1)
    keep = weighted > 0
    if keep.sum() < 2:
        return math.inf
    slope = np.polyfit(k[keep] * math.log(q), np.log(weighted[keep]), 1)[0]
    return float(slope)


def decay_check(coeffs, c_exponent: float, fit_tol: float = FIT_TOL) -> bool:
    """Whether ``mu_k * coeff_k`` decays at least like ``q^{c k}``."""
    if not c_exponent > 1:
        raise ValueError("the decay exponent must exceed 1")
    weighted, q = _decay_data(coeffs)
    return decay_rate(weighted, q) >= c_exponent - fit_tol


def holder_estimate(f: SymLatticeFn) -> float:
    """Slope of ``log |f(x_{n-1}) - f(x_n)|`` against ``n log q`` over the deepest quartile.

    Both halves of the grid contribute.  Returns ``inf`` for a constant tail.
    """
    lat = f.lattice
    depth = lat.depth
    if depth < 16:
        raise ValueError("need at least 16 lattice levels")
    n = np.arange(depth - depth // 4, depth)
    xs, ys = [], []
    for vals in (f.values_pos, f.values_neg):
        d = np.abs(vals[n - 1] - vals[n])
        keep = d > 0
        xs.append(n[keep] * math.log(lat.q))
        ys.append(np.log(d[keep]))
    x, y = np.concatenate(xs), np.concatenate(ys)
    if len(x) < 2:
        return math.inf
    return float(np.polyfit(x, y, 1)[0])
