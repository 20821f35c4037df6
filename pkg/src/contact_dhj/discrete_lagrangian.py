"""Discrete Herglotz variational integrator.

A discrete Lagrangian L_d(q0, q1, s0) drives the action recursion
``s_{k+1} = s_k + L_d(q_k, q_{k+1}, s_k)``; stationarity of the discrete
action gives the discrete Herglotz (DEL) equations solved by ``del_step``.
Throughout, the action value attached to a segment is the one at its left
endpoint.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (ContactState, ContinuousLagrangianModel,
                   DiscreteLagrangianModel, as_vector)
from .errors import NonFiniteError, RegularityViolated, StepError
from .newton import SINGULAR_TOL, newton, scaled_det

REEB_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteCurve:
    """Points q_0..q_N together with the action values s_0..s_N."""

    points: np.ndarray
    s_values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        s = np.asarray(self.s_values, dtype=float)
        if pts.shape[0] != s.size:
            raise ValueError(f"{pts.shape[0]} points but {s.size} action values")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "s_values", s)

    def __len__(self):
        return self.s_values.size


def _points(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] < 1:
        raise ValueError("need at least one point")
    return pts


def evolve_s(Ld: DiscreteLagrangianModel, points, s0):
    """Solve the discrete Cauchy problem for the action along ``points``."""
    pts = _points(points)
    s = np.empty(pts.shape[0])
    s[0] = float(s0)
    for k in range(1, pts.shape[0]):
        try:
            inc = Ld.value(pts[k - 1], pts[k], s[k - 1])
        except Exception as exc:
            raise StepError(k, exc) from exc
        if not np.isfinite(inc):
            raise StepError(k, NonFiniteError("L_d is not finite"))
        s[k] = s[k - 1] + inc
    return s


def discrete_action(Ld, points, s0):
    """s_N - s_0 along the discrete curve."""
    s = evolve_s(Ld, points, s0)
    return float(s[-1] - s[0])


def herglotz_residual(Ld, q_prev, q_cur, q_next, s_prev, s_cur):
    """Left-hand side of the discrete Herglotz equation at the middle point."""
    d1, _, d3 = Ld.partials(q_cur, q_next, s_cur)
    d2_prev = Ld.partials(q_prev, q_cur, s_prev)[1]
    return d1 + (1.0 + d3) * d2_prev


def check_regular(Ld, q0, q1, s0):
    """Raise RegularityViolated unless 1 + D3 L_d and D2D2 L_d are nondegenerate."""
    Ld.check_reeb_factor(q0, q1, s0, REEB_TOL)
    H22 = Ld.hessian22(q0, q1, s0)
    if scaled_det(H22) < SINGULAR_TOL:
        raise RegularityViolated(
            f"D2D2 L_d is singular at q0={q0}, q1={q1}, s0={s0}")


def del_step(Ld: DiscreteLagrangianModel, q_prev, q_cur, s_prev):
    """One step of the discrete Herglotz equations.

    Returns (q_next, s_cur); s_cur comes explicitly from the action
    recursion and q_next from damped Newton seeded by linear extrapolation.
    """
    q_prev, q_cur = as_vector(q_prev), as_vector(q_cur)
    s_prev = float(s_prev)
    s_cur = s_prev + Ld.value(q_prev, q_cur, s_prev)
    check_regular(Ld, q_prev, q_cur, s_prev)
    p_plus = Ld.partials(q_prev, q_cur, s_prev)[1]

    def F(z):
        d1, _, d3 = Ld.partials(q_cur, z, s_cur)
        return d1 + (1.0 + d3) * p_plus

    seed = 2.0 * q_cur - q_prev
    Ld.check_reeb_factor(q_cur, seed, s_cur, REEB_TOL)
    q_next, res, _ = newton(F, seed, what="del_step")
    Ld.check_reeb_factor(q_cur, q_next, s_cur, REEB_TOL)
    return q_next, s_cur


def run_del(Ld, q0, q1, s0, n_steps):
    """Iterate del_step from (q0, q1, s0); returns a curve of n_steps + 2 points."""
    q0, q1 = as_vector(q0), as_vector(q1)
    pts = [q0, q1]
    s = [float(s0)]
    for k in range(n_steps):
        try:
            q_next, s_cur = del_step(Ld, pts[-2], pts[-1], s[-1])
        except Exception as exc:
            raise StepError(k + 1, exc) from exc
        pts.append(q_next)
        s.append(s_cur)
    s.append(s[-1] + Ld.value(pts[-2], pts[-1], s[-1]))
    return DiscreteCurve(np.array(pts), np.array(s))


def legendre_plus(Ld, q0, q1, s0) -> ContactState:
    """FL+ : (q0, q1, s0) -> (q1, D2 L_d, s0 + L_d)."""
    d2 = Ld.partials(q0, q1, s0)[1]
    return ContactState(q1, d2, float(s0) + Ld.value(q0, q1, s0))


def legendre_minus(Ld, q0, q1, s0) -> ContactState:
    """FL- : (q0, q1, s0) -> (q0, -D1 L_d / (1 + D3 L_d), s0)."""
    d1, _, d3 = Ld.partials(q0, q1, s0)
    factor = 1.0 + d3
    if abs(factor) < REEB_TOL:
        raise RegularityViolated(f"1 + D3 L_d = {factor:.3e} in FL-")
    return ContactState(q0, -d1 / factor, s0)


def legendre_minus_inverse(Ld, x: ContactState, seed=None):
    """Find q1 with FL-(x.q, q1, x.s) == x; returns the triple (q0, q1, s0)."""
    q0, p0, s0 = x.q, x.p, x.s

    def F(z):
        d1, _, d3 = Ld.partials(q0, z, s0)
        return d1 + (1.0 + d3) * p0

    z0 = q0 if seed is None else as_vector(seed)
    q1, _, _ = newton(F, z0, what="FL- inverse")
    return q0, q1, s0


def legendre_plus_inverse(Ld, x: ContactState, seed=None):
    """Find (q0, s0) with FL+(q0, x.q, s0) == x; returns (q0, q1, s0)."""
    q1, p1, s1 = x.q, x.p, x.s
    n = q1.size

    def F(z):
        q0, s0 = z[:n], z[n]
        d2 = Ld.partials(q0, q1, s0)[1]
        return np.concatenate([d2 - p1, [s0 + Ld.value(q0, q1, s0) - s1]])

    z0 = np.concatenate([q1 if seed is None else as_vector(seed), [s1]])
    z, _, _ = newton(F, z0, fscale=max(1.0, abs(s1)), what="FL+ inverse")
    return z[:n], q1, float(z[n])


def lagrangian_flow_phi(Ld, q0, q1, s0):
    """Phi : (q0, q1, s0) -> (q1, q2, s1)."""
    q2, s1 = del_step(Ld, q0, q1, s0)
    return as_vector(q1), q2, s1


def lagrangian_flow_tilde(Ld, x: ContactState) -> ContactState:
    """Phi~ = FL+ o (FL-)^{-1} on T*Q x R."""
    q0, q1, s0 = legendre_minus_inverse(Ld, x)
    return legendre_plus(Ld, q0, q1, s0)


def momenta(Ld, curve: DiscreteCurve):
    """p+ and p- at every interior point of a DEL curve.

    Row k - 1 corresponds to interior index k = 1..N-1.
    """
    pts, s = curve.points, curve.s_values
    N = len(curve) - 1
    p_plus = np.array([Ld.partials(pts[k - 1], pts[k], s[k - 1])[1] for k in range(1, N)])
    p_minus = np.array([legendre_minus(Ld, pts[k], pts[k + 1], s[k]).p for k in range(1, N)])
    return p_plus, p_minus


def midpoint_lagrangian(L: ContinuousLagrangianModel, h, s_stage="midpoint"):
    """Midpoint discretization of a continuous Lagrangian.

    ``s_stage="left"`` gives h L(qbar, v, s0).  ``s_stage="midpoint"``
    (default) evaluates L at sbar = s0 + (h/2) L(qbar, v, s0) instead, which
    keeps the scheme second order when L depends on s.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if s_stage not in ("left", "midpoint"):
        raise ValueError(f"unknown s_stage {s_stage!r}")
    h = float(h)

    def _args(q0, q1):
        return 0.5 * (q0 + q1), (q1 - q0) / h

    if s_stage == "left":
        def Ld(q0, q1, s0):
            qb, v = _args(q0, q1)
            return h * L.value(qb, v, s0)

        def D1(q0, q1, s0):
            Lq, Lv, _ = L.gradient(*_args(q0, q1), s0)
            return 0.5 * h * Lq - Lv

        def D2(q0, q1, s0):
            Lq, Lv, _ = L.gradient(*_args(q0, q1), s0)
            return 0.5 * h * Lq + Lv

        def D3(q0, q1, s0):
            return h * L.gradient(*_args(q0, q1), s0)[2]

        return DiscreteLagrangianModel(Ld, L.n, D1, D2, D3, name=f"midpoint-left({L.name})")

    def stages(q0, q1, s0):
        qb, v = _args(q0, q1)
        g0 = L.gradient(qb, v, s0)
        sb = s0 + 0.5 * h * L.value(qb, v, s0)
        g1 = L.gradient(qb, v, sb)
        return qb, v, sb, g0, g1

    def Ld(q0, q1, s0):
        qb, v, sb, _, _ = stages(q0, q1, s0)
        return h * L.value(qb, v, sb)

    def D1(q0, q1, s0):
        _, _, _, (Lq0, Lv0, _), (Lq1, Lv1, Ls1) = stages(q0, q1, s0)
        dsb = 0.5 * h * (0.5 * Lq0 - Lv0 / h)
        return h * (0.5 * Lq1 - Lv1 / h + Ls1 * dsb)

    def D2(q0, q1, s0):
        _, _, _, (Lq0, Lv0, _), (Lq1, Lv1, Ls1) = stages(q0, q1, s0)
        dsb = 0.5 * h * (0.5 * Lq0 + Lv0 / h)
        return h * (0.5 * Lq1 + Lv1 / h + Ls1 * dsb)

    def D3(q0, q1, s0):
        _, _, _, (_, _, Ls0), (_, _, Ls1) = stages(q0, q1, s0)
        return h * Ls1 * (1.0 + 0.5 * h * Ls0)

    return DiscreteLagrangianModel(Ld, L.n, D1, D2, D3, name=f"midpoint({L.name})")
