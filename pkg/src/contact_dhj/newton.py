"""Damped Newton iteration used by every implicit step in the package."""
from __future__ import annotations

import logging

import numpy as np

from .core import EPS, finite_difference_jacobian
from .errors import NewtonDiverged, RegularityViolated

log = logging.getLogger(__name__)

ATOL = 1e-11
MAX_ITER = 50
MAX_HALVINGS = 8
SINGULAR_TOL = 1e-12


def scaled_det(J):
    """|det J| divided by the product of its row norms (Hadamard ratio, in [0, 1])."""
    J = np.atleast_2d(J)
    norms = np.linalg.norm(J, axis=1)
    if np.any(norms == 0.0):
        return 0.0
    return abs(np.linalg.det(J)) / np.prod(norms)


def newton(F, x0, jac=None, atol=ATOL, max_iter=MAX_ITER,
           max_halvings=MAX_HALVINGS, fscale=1.0, what="newton"):
    """Solve F(x) = 0 by damped Newton with backtracking.

    Convergence is declared when ``||F||_inf <= atol``, or when the full
    Newton step has shrunk to round-off relative to ``x`` (the residual
    then sits at its floating-point floor, which for large-magnitude
    problems may exceed ``atol``).  ``fscale`` is the magnitude of the terms
    making up F and sets that floor when the line search stalls.

    Returns ``(x, residual_norm, iterations)``.  Raises NewtonDiverged with
    the residual trace, or RegularityViolated if the Jacobian is singular.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    f = np.atleast_1d(F(x))
    r = np.max(np.abs(f)) if np.all(np.isfinite(f)) else np.inf
    trace = [r]
    if not np.isfinite(r):
        raise NewtonDiverged(f"{what}: non-finite residual at seed", trace)
    for it in range(max_iter):
        if r <= atol:
            return x, r, it
        J = np.atleast_2d(jac(x)) if jac is not None else finite_difference_jacobian(F, x)
        if not np.all(np.isfinite(J)) or scaled_det(J) < SINGULAR_TOL:
            raise RegularityViolated(
                f"{what}: singular Jacobian (scaled det {scaled_det(J):.3e}) at x={x}")
        dx = np.linalg.solve(J, -f)
        if np.max(np.abs(dx)) <= 4 * EPS * max(1.0, np.max(np.abs(x))):
            log.debug("%s: stagnated at round-off, residual %.3e", what, r)
            return x, r, it
        lam = 1.0
        for _ in range(max_halvings + 1):
            x_try = x + lam * dx
            f_try = np.atleast_1d(F(x_try))
            r_try = np.max(np.abs(f_try)) if np.all(np.isfinite(f_try)) else np.inf
            if r_try < r:
                break
            lam *= 0.5
        else:
            # no decrease: accept if we are already at round-off level of F
            if r <= 64 * EPS * max(1.0, fscale):
                return x, r, it
            raise NewtonDiverged(f"{what}: line search failed, residual {r:.3e}", trace)
        x, f, r = x_try, f_try, r_try
        trace.append(r)
    if r <= atol:
        return x, r, max_iter
    raise NewtonDiverged(
        f"{what}: no convergence in {max_iter} iterations, residual {r:.3e}", trace)

