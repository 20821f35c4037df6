"""Right and left discrete contact Hamiltonian steppers."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .continuous import Trajectory
from .core import (LEFT, RIGHT, ContactState, DiscreteHamiltonianModel,
                   DiscreteLagrangianModel, as_vector)
from .errors import DegenerateStep, StepError
from .newton import newton

DEGENERATE_TOL = 1e-12


def _right_residual(H, x):
    def F(pn):
        d1, _, d3 = H.partials(x.q, pn, x.s)
        return x.p * (1.0 - d3) - d1
    return F


def right_step(H: DiscreteHamiltonianModel, x: ContactState) -> ContactState:
    """(q_k, p_k, s_k) -> (q_{k+1}, p_{k+1}, s_{k+1}) for a right Hamiltonian.

    p_{k+1} solves p_k (1 - D3 H) = D1 H by Newton seeded at p_k; then
    q_{k+1} = D2 H and s_{k+1} = s_k + p_{k+1}.q_{k+1} - H.
    """
    if H.side != RIGHT:
        raise ValueError("right_step needs a right discrete Hamiltonian")
    F = _right_residual(H, x)
    d1_seed = H.partials(x.q, x.p, x.s)[0]
    fscale = max(1.0, float(np.max(np.abs(x.p))), float(np.max(np.abs(d1_seed))))
    pn, _, _ = newton(F, x.p, fscale=fscale, what="right_step")
    _, d2, d3 = H.partials(x.q, pn, x.s)
    if abs(1.0 - d3) < DEGENERATE_TOL:
        raise DegenerateStep(f"1 - D3 H+_d = {1.0 - d3:.3e} at the momentum root")
    hval = H.value(x.q, pn, x.s)
    return ContactState(d2, pn, x.s + (float(np.dot(pn, d2)) - hval))


def left_step(H: DiscreteHamiltonianModel, x: ContactState) -> ContactState:
    """(q_k, p_k, s_k) -> (q_{k+1}, p_{k+1}, s_{k+1}) for a left Hamiltonian.

    Solves q_k = -D1 H and s_k = s_{k+1} - p_k.D1 H + H jointly for
    (q_{k+1}, s_{k+1}), seeded at (q_k, s_k); then p_{k+1} = -D2 H.
    """
    if H.side != LEFT:
        raise ValueError("left_step needs a left discrete Hamiltonian")
    n = x.n

    def F(z):
        qn, sn = z[:n], z[n]
        d1 = H.partials(x.p, qn, sn)[0]
        return np.concatenate([x.q + d1, [x.s - sn + float(np.dot(x.p, d1)) - H.value(x.p, qn, sn)]])

    fscale = max(1.0, abs(x.s), float(np.max(np.abs(x.q))))
    z, _, _ = newton(F, np.concatenate([x.q, [x.s]]), fscale=fscale, what="left_step")
    qn, sn = z[:n], float(z[n])
    d2 = H.partials(x.p, qn, sn)[1]
    return ContactState(qn, -d2, sn)


def step(H, x):
    return right_step(H, x) if H.side == RIGHT else left_step(H, x)


def run_trajectory(H: DiscreteHamiltonianModel, x0: ContactState, n_steps: int, h=1.0):
    """Iterate the stepper matching ``H.side``; times are k * h."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    states = [x0.as_array()]
    x = x0
    for k in range(n_steps):
        try:
            x = step(H, x)
        except Exception as exc:
            raise StepError(k + 1, exc) from exc
        states.append(x.as_array())
    return Trajectory(h * np.arange(n_steps + 1), np.array(states))


def right_from_lagrangian(Ld: DiscreteLagrangianModel) -> DiscreteHamiltonianModel:
    """Right discrete Hamiltonian H+_d = p.q' - L_d(q, q', s).

    q' = Psi(q, p, s) inverts p = D2 L_d(q, q', s) by Newton; the partials
    use D1 H = -D1 L_d, D2 H = q', D3 H = -D3 L_d.
    """
    n = Ld.n

    @lru_cache(maxsize=256)
    def _psi(qt, pt, s):
        q, p = np.array(qt), np.array(pt)
        F = lambda z: Ld.partials(q, z, s)[1] - p
        z, _, _ = newton(F, q, fscale=max(1.0, float(np.max(np.abs(p)))), what="Psi")
        z.setflags(write=False)
        return z

    def psi(q, p, s):
        return _psi(tuple(as_vector(q)), tuple(as_vector(p)), float(s))

    def Hd(q, p, s):
        qn = psi(q, p, s)
        return float(np.dot(p, qn)) - Ld.value(q, qn, s)

    def D1(q, p, s):
        return -Ld.partials(q, psi(q, p, s), s)[0]

    def D2(q, p, s):
        return psi(q, p, s).copy()

    def D3(q, p, s):
        return -Ld.partials(q, psi(q, p, s), s)[2]

    return DiscreteHamiltonianModel(RIGHT, Hd, n, D1, D2, D3,
                                    name=f"right({Ld.name})", meta={"psi": psi, "Ld": Ld})
