"""Independent high-precision references built directly on mpmath."""

import mpmath


def mp_trig(z, q, kind, dps=200):
    """S_q, C_q or S_q' by the defining series at ``dps`` digits."""
    with mpmath.workdps(dps):
        z, q = mpmath.mpf(z), mpmath.mpf(q)
        total = mpmath.mpf(0)
        for n in range(400):
            if kind == "C":
                term = (-1) ** n * q ** (n * (n - mpmath.mpf(0.5))) * z ** (2 * n) / mpmath.qp(q, q, 2 * n)
            else:
                term = (-1) ** n * q ** (n * (n + mpmath.mpf(0.5))) / mpmath.qp(q, q, 2 * n + 1)
                term *= (2 * n + 1) * z ** (2 * n) if kind == "dS" else z ** (2 * n + 1)
            total += term
            if n > 5 and abs(term) < mpmath.mpf(10) ** (-dps):
                break
        return total


def mp_zero(guess, q, dps=200):
    with mpmath.workdps(dps):
        return mpmath.findroot(lambda z: mp_trig(z, q, "S", dps), mpmath.mpf(guess))


def mp_mu(w, q, dps=200):
    with mpmath.workdps(dps):
        q = mpmath.mpf(q)
        return (1 - q) * mp_trig(mpmath.sqrt(q) * w, q, "C", dps) * mp_trig(w, q, "dS", dps)


def mp_ml(alpha, z, q, damped=False, terms=400):
    with mpmath.workdps(40):
        q, z, alpha = mpmath.mpf(q), mpmath.mpf(z), mpmath.mpf(alpha)
        total = mpmath.mpf(0)
        for n in range(terms):
            t = z**n / mpmath.qgamma(alpha * n + 1, q)
            if damped:
                t *= q ** (alpha * n * (n - 1) / 2)
            total += t
        return total
