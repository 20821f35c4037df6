"""Continuous contact dynamics and a fixed-step RK4 reference integrator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (ContactState, ContinuousHamiltonianModel,
                   ContinuousLagrangianModel, Tangent, VelocityState)
from .errors import NonFiniteError, RegularityViolated

COND_LIMIT = 1e12


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled trajectory.

    ``array`` has one packed state per row; for contact trajectories the
    row layout is (q, p, s).
    """

    times: np.ndarray
    array: np.ndarray
    kind: str = "contact"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        a = np.atleast_2d(np.asarray(self.array, dtype=float))
        if a.shape[0] != t.size:
            raise ValueError(f"{t.size} times but {a.shape[0]} states")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("trajectory contains non-finite states")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "array", a)

    def __len__(self):
        return self.times.size

    @property
    def n(self):
        return (self.array.shape[1] - 1) // 2

    @property
    def q(self):
        return self.array[:, :self.n]

    @property
    def p(self):
        return self.array[:, self.n:2 * self.n]

    @property
    def s(self):
        return self.array[:, -1]

    @property
    def states(self):
        if self.kind == "contact":
            return [ContactState.from_array(row) for row in self.array]
        if self.kind == "velocity":
            return [VelocityState.from_array(row) for row in self.array]
        return list(self.array)

    def __getitem__(self, k):
        return self.states[k] if self.kind != "raw" else self.array[k]


def contact_vector_field(H: ContinuousHamiltonianModel, x: ContactState) -> Tangent:
    """(H_p, -(H_q + p H_s), p . H_p - H) at x."""
    Hq, Hp, Hs = H.partials(x.q, x.p, x.s)
    h = H.value(x.q, x.p, x.s)
    return Tangent(Hp, -(Hq + x.p * Hs), float(np.dot(x.p, Hp)) - h)


def herglotz_rhs(L: ContinuousLagrangianModel, x: VelocityState):
    """First-order form of the Herglotz equations at x.

    Returns (dq, dv, ds) with dq = v, ds = L and dv the acceleration solving
    L_vv a = L_q + L_s L_v - L_vq v - L_vs L.
    """
    Lq, Lv, Ls = L.gradient(x.q, x.v, x.s)
    Lvv, Lvq, Lvs = L.second_blocks(x.q, x.v, x.s)
    lval = L.value(x.q, x.v, x.s)
    cond = np.linalg.cond(Lvv)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise RegularityViolated(
            f"L_vv is singular at {x} (condition number {cond:.3e})")
    rhs = Lq + Ls * Lv - Lvq @ x.v - Lvs * lval
    a = np.linalg.solve(Lvv, rhs)
    return x.v.copy(), a, lval


def hamiltonian_field(H):
    """Packed-array vector field of H for use with integrate_rk4."""
    def f(y):
        return contact_vector_field(H, ContactState.from_array(y)).as_array()
    return f


def herglotz_field(L):
    """Packed-array (q, v, s) vector field of the Herglotz equations."""
    def f(y):
        dq, dv, ds = herglotz_rhs(L, VelocityState.from_array(y))
        return np.concatenate([dq, dv, [ds]])
    return f


def _pack(x0):
    if isinstance(x0, ContactState):
        return x0.as_array(), "contact"
    if isinstance(x0, VelocityState):
        return x0.as_array(), "velocity"
    return np.atleast_1d(np.asarray(x0, dtype=float)).copy(), "raw"


def integrate_rk4(field, x0, h, n_steps, t0=0.0):
    """Classical fixed-step RK4.

    ``field`` maps a packed state array to its time derivative (see
    hamiltonian_field / herglotz_field); ``x0`` may be a ContactState,
    VelocityState or plain array.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    y, kind = _pack(x0)
    out = np.empty((n_steps + 1, y.size))
    out[0] = y
    for k in range(n_steps):
        k1 = np.asarray(field(y), dtype=float)
        k2 = np.asarray(field(y + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(field(y + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(field(y + h * k3), dtype=float)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteError(f"RK4 produced a non-finite state at step {k + 1}",
                                 index=k + 1)
        out[k + 1] = y
    times = t0 + h * np.arange(n_steps + 1)
    return Trajectory(times, out, kind)


def legendre_continuous(L: ContinuousLagrangianModel, x: VelocityState) -> ContactState:
    """Fiber derivative (q, v, s) -> (q, L_v, s)."""
    return ContactState(x.q, L.gradient(x.q, x.v, x.s)[1], x.s)


def dissipation_residual(H: ContinuousHamiltonianModel, traj: Trajectory):
    """Max defect of dH/dt = -H_s H along ``traj`` over windows of two steps.

    H(x_{k+2}) - H(x_k) is compared with Simpson's rule for the integral of
    -H_s H over the window; the defect is divided by the window length.
    """
    if len(traj) < 3:
        raise ValueError("need at least 3 samples")
    vals = np.empty(len(traj))
    rates = np.empty(len(traj))
    for k, x in enumerate(traj.states):
        vals[k] = H.value(x.q, x.p, x.s)
        rates[k] = -H.partials(x.q, x.p, x.s)[2] * vals[k]
    h = traj.times[1] - traj.times[0]
    m = (len(traj) - 1) // 2 * 2
    dH = vals[2:m + 1:2] - vals[0:m - 1:2]
    simpson = (h / 3.0) * (rates[0:m - 1:2] + 4.0 * rates[1:m:2] + rates[2:m + 1:2])
    return float(np.max(np.abs(dH - simpson)) / (2.0 * h))
