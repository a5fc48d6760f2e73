"""q-fractional calculus on q-geometric lattices and the q-fractional
Sturm--Liouville problem solved by the Ritz method."""

from .eigensolve import EigenConvergenceError, SymMatrix, jacobi_eigs
from .exprparse import ExprEvalError, ExprSyntaxError, evaluate, parse, to_source
from .qcore import (
    LatticeFn,
    QLattice,
    SymLatticeFn,
    dq,
    dq_inv,
    jackson_int,
    jackson_int_sym,
    qgamma,
    qnumber,
    qpoch_finite,
    qpoch_inf,
    qpoch_real,
)
from .qfourier import fourier_coeffs, qmean_dist, sine_coeffs, synthesize, synthesize_nodes
from .qfrac import (
    FracOrder,
    dleft_caputo,
    dleft_rl,
    dright_caputo,
    dright_rl,
    ileft,
    iright,
    norm_bounds,
)
from .qspecial import TrigBasis, ml_E, ml_e, mu_k, q_cos, q_sin, sq_zeros
from .ritz import SLProblem, convergence_sweep, spectrum
from .variational import Functional, el_residual, isoperimetric_residual, rayleigh

__version__ = "0.1.0"
