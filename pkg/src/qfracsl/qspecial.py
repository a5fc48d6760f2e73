r"""q-trigonometric and q-Mittag--Leffler functions.

.. math::

    S_q(z) = \sum_{n\ge0} (-1)^n \frac{q^{n(n+1/2)} z^{2n+1}}{(q;q)_{2n+1}},
    \qquad
    C_q(z) = \sum_{n\ge0} (-1)^n \frac{q^{n(n-1/2)} z^{2n}}{(q;q)_{2n}}.

The positive zeros ``w_k`` of ``S_q`` and the constants
``mu_k = (1-q) C_q(q^{1/2} w_k) S_q'(w_k)`` define the sine basis used by the
Fourier and Ritz modules.  All series are summed with elementwise Neumaier
compensation and stop once a term drops below ``1e-18`` of the partial sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from ._summation import KahanAccumulator
from .qcore import QLattice, qgamma, qpoch_inf

SERIES_RTOL = 1e-18
MAX_TERMS = 4000
K_MAX_DEFAULT = 8
ZERO_TOL = 1e-12


class BracketError(RuntimeError):
    """A sign change of ``S_q`` could not be isolated."""


def _series(z, q, first, ratio, power_shift=0):
    """Sum ``sum_n t_n`` with ``t_0 = first(z)`` and ``t_{n+1} = t_n * ratio(n, z)``.

    With ``power_shift`` set, term ``n`` is multiplied by ``2n + power_shift``
    (termwise differentiation).
    """
    z = np.asarray(z, dtype=float)
    term = first(z)
    acc = KahanAccumulator(z.shape)
    peaked = np.zeros(z.shape, dtype=bool)
    prev = np.abs(term)
    with np.errstate(over="raise", invalid="raise"):
        for n in range(MAX_TERMS):
            contrib = term * (2 * n + power_shift) if power_shift else term
            if not np.all(np.isfinite(contrib)):
                raise OverflowError("series term overflowed")
            acc.add(contrib)
            mag = np.abs(contrib)
            peaked |= np.abs(term) < prev
            prev = np.abs(term)
            done = peaked & (mag <= SERIES_RTOL * np.abs(acc.value)) | (term == 0)
            if np.all(done):
                return acc.value
            try:
                term = term * ratio(n, z)
            except FloatingPointError as exc:
                raise OverflowError("series term overflowed") from exc
    raise ArithmeticError("series did not converge")


def _sin_ratio(q):
    return lambda n, z: -(q ** (2 * n + 1.5)) * z * z / ((1 - q ** (2 * n + 2)) * (1 - q ** (2 * n + 3)))


def _cos_ratio(q):
    return lambda n, z: -(q ** (2 * n + 0.5)) * z * z / ((1 - q ** (2 * n + 1)) * (1 - q ** (2 * n + 2)))


def _scalar_or_array(z, out):
    return float(out) if np.ndim(z) == 0 else out


def q_sin(z, q: float):
    """``S_q(z)``; accepts scalars or arrays."""
    out = _series(z, q, lambda z: z / (1 - q), _sin_ratio(q))
    return _scalar_or_array(z, out)


def q_cos(z, q: float):
    """``C_q(z)``."""
    out = _series(z, q, np.ones_like, _cos_ratio(q))
    return _scalar_or_array(z, out)


def q_sin_prime(z, q: float):
    """Termwise derivative ``S_q'(z)``."""
    # t_n = (-1)^n q^{n(n+1/2)} z^{2n} / (q;q)_{2n+1}, weighted by (2n+1)
    out = _series(z, q, lambda z: np.ones_like(z) / (1 - q), _sin_ratio(q), power_shift=1)
    return _scalar_or_array(z, out)


def _bisect(fn, lo: float, hi: float, flo: float) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sq_zeros(q: float, K: int, k_max: int = K_MAX_DEFAULT, subdivisions: int = 32) -> np.ndarray:
    """The first ``K`` positive zeros of ``S_q``.

    The scan uses the geometric grid ``q^{-j/(2 s)}`` with ``s = subdivisions``
    starting below the first zero, and every bracket is bisected to the
    floating-point limit.
    """
    if K < 1:
        raise ValueError("K must be positive")
    if K > k_max:
        raise ValueError(f"K={K} exceeds k_max={k_max}")
    ratio = q ** (-0.5 / subdivisions)
    z = 0.5
    f_prev = q_sin(z, q)
    if not f_prev > 0:
        raise BracketError("S_q is not positive at the start of the scan")
    roots = []
    for _ in range(200 * subdivisions * (K + 4)):
        z_next = z * ratio
        f_next = q_sin(z_next, q)
        if f_next == 0.0:
            roots.append(z_next)
            z_next *= 1.0 + 1e-12
            f_next = q_sin(z_next, q)
        elif (f_next > 0) != (f_prev > 0):
            roots.append(_bisect(lambda t: q_sin(t, q), z, z_next, f_prev))
        if len(roots) == K:
            _check_roots(roots, q)
            return np.array(roots)
        z, f_prev = z_next, f_next
    raise BracketError(f"found only {len(roots)} of {K} zeros in the scan window")


def _check_roots(roots, q):
    for k, w in enumerate(roots, 1):
        if abs(q_sin(w, q)) > ZERO_TOL * abs(w * q_sin_prime(w, q)):
            raise BracketError(f"zero {k} near {w} failed the root acceptance test")


# -- extended-precision evaluation ---------------------------------------------
#
# Near the zeros of S_q the series terms exceed the result by many orders of
# magnitude (about 1e43 at the 12th zero for q = 0.5), and the lattice values
# S_q(w_k q^n) are that sensitive to w_k as well.  Tables of basis values are
# therefore computed with mpmath at a working precision sized from the largest
# series term, then rounded to double.

_GUARD_DIGITS = 30


def _log10_max_term(z: float, q: float) -> float:
    """log10 of the largest term of the S_q / C_q / S_q' series at ``|z|``."""
    z = abs(float(z))
    if z == 0.0:
        return 0.0
    lq, lz = math.log10(q), math.log10(z)
    best, logpoch, n = -math.inf, 0.0, 0
    while True:
        for j in (2 * n, 2 * n + 1):
            if j:
                logpoch += math.log10(1.0 - q**j)
        val = n * (n + 0.5) * lq + (2 * n + 1) * lz - logpoch + math.log10(2 * n + 1)
        if val < best - 2.0:
            return max(best, 0.0)
        best = max(best, val)
        n += 1


def _digits_for(z: float, q: float, cancelling: bool = False) -> int:
    """Working precision for evaluating at ``z``.

    ``cancelling`` covers results as small as the reciprocal of the largest
    term (``C_q(sqrt(q) w_k)`` is one), which doubles the digits lost.
    """
    lost = int(math.ceil(_log10_max_term(z, q)))
    return (2 * lost if cancelling else lost) + _GUARD_DIGITS


def _series_mp(z, q, kind: str):
    """S_q, C_q or S_q' ("S", "C", "dS") at the current mpmath precision."""
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps - 5)
    z2 = z * z
    total = mpmath.mpf(0)
    if kind == "C":
        term, shift = mpmath.mpf(1), 0.5
    else:
        term, shift = 1 / (1 - q), 1.5
    peak = mpmath.mpf(0)
    n = 0
    while True:
        weight = 2 * n + 1 if kind == "dS" else 1
        total += weight * term
        peak = max(peak, abs(term))
        if n > 2 and abs(weight * term) < eps * peak:
            break
        if kind == "C":
            den = (1 - q ** (2 * n + 1)) * (1 - q ** (2 * n + 2))
        else:
            den = (1 - q ** (2 * n + 2)) * (1 - q ** (2 * n + 3))
        term = -term * q ** (2 * n + shift) * z2 / den
        n += 1
    return total * z if kind == "S" else total


def _refine_zero(w: float, q: float) -> str:
    """Polish a double-precision zero of S_q by Newton steps in extended precision."""
    with mpmath.workdps(_digits_for(w, q, cancelling=True) + 10):
        qq = mpmath.mpf(q)
        x = mpmath.mpf(w)
        tol = mpmath.mpf(10) ** (-mpmath.mp.dps + 5) * x
        for _ in range(60):
            step = _series_mp(x, qq, "S") / _series_mp(x, qq, "dS")
            x -= step
            if abs(step) <= tol:
                return mpmath.nstr(x, mpmath.mp.dps)
    raise BracketError(f"Newton refinement of the zero near {w} did not converge")


@lru_cache(maxsize=64)
def _precise_zeros(q: float, K: int, k_max: int) -> tuple:
    return tuple(_refine_zero(w, q) for w in sq_zeros(q, K, k_max=k_max))


def _mu_precise(w_str: str, q: float) -> float:
    with mpmath.workdps(_digits_for(float(w_str), q, cancelling=True)):
        qq, w = mpmath.mpf(q), mpmath.mpf(w_str)
        val = (1 - qq) * _series_mp(mpmath.sqrt(qq) * w, qq, "C") * _series_mp(w, qq, "dS")
        return float(val)


def _precise_values(w_str: str, q: float, scale: str, exponents, kind: str) -> np.ndarray:
    """``kind(scale * w * q^n)`` for the given lattice exponents ``n``.

    ``kind`` "C1" is ``C_q - 1``, rounded only once.
    """
    top = float(w_str) * (1.0 if scale == "1" else q ** (0.5 if scale == "sqrt" else 1.0))
    with mpmath.workdps(_digits_for(top, q)):
        qq, w = mpmath.mpf(q), mpmath.mpf(w_str)
        factor = {"1": 1, "sqrt": mpmath.sqrt(qq), "q": qq}[scale]
        if kind == "C1":
            return np.array([float(_series_mp(factor * w * qq**int(n), qq, "C") - 1) for n in exponents])
        return np.array([float(_series_mp(factor * w * qq**int(n), qq, kind)) for n in exponents])


def q_sin_extended(z: float, q: float) -> float:
    """``S_q(z)`` evaluated in extended precision, then rounded once."""
    with mpmath.workdps(_digits_for(z, q)):
        return float(_series_mp(mpmath.mpf(float(z)), mpmath.mpf(q), "S"))


def mu_k(w_k: float, q: float) -> float:
    """``(1-q) C_q(sqrt(q) w_k) S_q'(w_k)``; positive for a correctly indexed zero.

    ``w_k`` is first polished to the nearby exact zero, because ``C_q(sqrt(q) w)``
    is too sensitive to ``w`` for a double-precision root to determine it.
    """
    val = _mu_precise(_refine_zero(w_k, q), q)
    if not val > 0:
        raise ArithmeticError(f"mu({w_k}) = {val} is not positive; zero misindexed or inaccurate")
    return val


@dataclass(frozen=True, eq=False)
class TrigBasis:
    """Zeros ``w`` of ``S_q`` and their normalisation constants ``mu``.

    Node tables ``S_q(s w_k x_n / a)`` and ``C_q(s w_k x_n / a)`` for the scale
    factors ``s`` in ``{1, sqrt(q), q}`` are computed in extended precision and
    cached per basis.
    """

    lattice: QLattice
    K: int
    w: np.ndarray
    mu: np.ndarray
    w_exact: tuple = field(repr=False, default=())
    _tables: dict = field(repr=False, default_factory=dict, compare=False)

    @classmethod
    def build(cls, lattice: QLattice, K: int, k_max: int = K_MAX_DEFAULT) -> "TrigBasis":
        exact = _precise_zeros(lattice.q, K, k_max)
        w = np.array([float(s) for s in exact])
        mu = np.array([_mu_precise(s, lattice.q) for s in exact])
        if not np.all(np.isfinite(mu)):
            raise OverflowError("normalisation constants overflow; lower K")
        if not np.all(mu > 0):
            raise ArithmeticError("nonpositive normalisation constant; zero misindexed")
        w.setflags(write=False)
        mu.setflags(write=False)
        return cls(lattice, K, w, mu, exact)

    def _table(self, kind: str, k: int, scale: str) -> np.ndarray:
        if not 1 <= k <= self.K:
            raise IndexError(f"basis index {k} outside 1..{self.K}")
        key = (kind, k, scale)
        if key not in self._tables:
            vals = _precise_values(self.w_exact[k - 1], self.lattice.q, scale, range(self.lattice.size), kind)
            vals.setflags(write=False)
            self._tables[key] = vals
        return self._tables[key]

    def sine_nodes(self, k: int, scale: str = "1") -> np.ndarray:
        """``S_q(s w_k x_n / a)`` at every lattice node; ``scale`` is "1", "sqrt" or "q"."""
        return self._table("S", k, scale)

    def cosine_nodes(self, k: int, scale: str = "1") -> np.ndarray:
        """``C_q(s w_k x_n / a)`` at every lattice node."""
        return self._table("C", k, scale)

    def cosine_offsets(self, k: int, scale: str = "1") -> np.ndarray:
        """``C_q(s w_k x_n / a) - 1``, accurate where the cosine is close to 1."""
        return self._table("C1", k, scale)

    def sine(self, k: int, x, scale: str = "1"):
        """``S_q(s w_k x / a)`` at arbitrary points, in extended precision."""
        return self._pointwise("S", k, x, scale)

    def cosine(self, k: int, x, scale: str = "1"):
        return self._pointwise("C", k, x, scale)

    def _pointwise(self, kind, k, x, scale):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        q = self.lattice.q
        w_str = self.w_exact[k - 1]
        top = float(w_str) * float(np.max(np.abs(xs), initial=0.0)) / self.lattice.a
        with mpmath.workdps(_digits_for(top, q)):
            qq, w = mpmath.mpf(q), mpmath.mpf(w_str)
            factor = {"1": 1, "sqrt": mpmath.sqrt(qq), "q": qq}[scale]
            out = np.array(
                [float(_series_mp(factor * w * mpmath.mpf(float(t)) / self.lattice.a, qq, kind)) for t in xs]
            )
        return float(out[0]) if np.ndim(x) == 0 else out


# -- q-Mittag-Leffler functions -------------------------------------------------


ML_MAX_TERMS = 1_000_000


def _gamma_ratio(x: float, step: float, q: float) -> float:
    """``Gamma_q(x) / Gamma_q(x + step)`` without forming either gamma value."""
    return qpoch_inf(q ** (x + step), q) / qpoch_inf(q**x, q) * (1.0 - q) ** step


def _ml_terms(alpha, z, q, damped, start):
    z = np.asarray(z, dtype=float)
    acc = KahanAccumulator(z.shape)
    term = np.ones(z.shape) * z**start / qgamma(alpha * start + 1, q)
    if damped:
        term = term * q ** (alpha * start * (start - 1) / 2)
    n = start
    while True:
        acc.add(term)
        small = np.abs(term) <= SERIES_RTOL * np.abs(acc.value)
        if n > start + 2 and np.all(small | (term == 0)):
            return acc.value
        factor = z * _gamma_ratio(alpha * n + 1, alpha, q)
        if damped:
            factor = factor * q ** (alpha * n)
        term = term * factor
        n += 1
        if n > ML_MAX_TERMS:
            raise ArithmeticError("Mittag-Leffler series did not converge")


def ml_e(alpha: float, z, q: float, start: int = 0):
    """``e_{alpha,1}(z; q) = sum z^n / Gamma_q(alpha n + 1)`` for ``|z| (1-q)^alpha < 1``.

    ``start`` drops the leading terms, e.g. ``start=1`` gives ``e - 1``.
    """
    zz = np.asarray(z, dtype=float)
    if np.any(np.abs(zz) * (1 - q) ** alpha >= 1):
        raise ValueError("e_{alpha,1}(z;q) needs |z| (1-q)^alpha < 1")
    return _scalar_or_array(z, _ml_terms(alpha, zz, q, False, start))


def ml_E(alpha: float, z, q: float, start: int = 0):
    """``E_{alpha,1}(z; q) = sum q^{alpha n(n-1)/2} z^n / Gamma_q(alpha n + 1)``."""
    return _scalar_or_array(z, _ml_terms(alpha, np.asarray(z, dtype=float), q, True, start))
