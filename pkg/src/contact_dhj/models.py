"""Bundled models with analytic partials.

* the discrete parachute right Hamiltonian (unit step) and its closed-form map;
* the free particle and the linearly damped oscillator in continuous,
  discrete-Lagrangian and discrete-Hamiltonian forms;
* trivial discrete Hamiltonians +-p.q whose flow is the identity;
* a dissipative potential well used to exercise the continuous
  Hamilton-Jacobi theorem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (LEFT, RIGHT, ContactState, ContinuousHamiltonianModel,
                   ContinuousLagrangianModel, DiscreteHamiltonianModel,
                   DiscreteLagrangianModel, as_vector)
from .discrete_lagrangian import midpoint_lagrangian
from .errors import DegenerateStep


@dataclass(frozen=True)
class ParachuteParams:
    m: float = 1.0
    g: float = 10.0
    lam: float = -0.01

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")


DEFAULT_PARACHUTE = ParachuteParams(m=1.0, g=10.0, lam=-0.01)
DEFAULT_SEED = (100.0, 1.0, 1.0)


def parachute_right_hamiltonian(params: ParachuteParams = DEFAULT_PARACHUTE):
    """H+_d(q, p', s) = (p' + 2 lam s)^2 / (2m) + (m g / 2 lam)(exp(2 lam q) - 1)."""
    m, g, lam = params.m, params.g, params.lam

    def Hd(q, p, s):
        return float(np.sum((p + 2 * lam * s) ** 2) / (2 * m)
                     + m * g / (2 * lam) * np.sum(np.expm1(2 * lam * q)))

    def D1(q, p, s):
        return m * g * np.exp(2 * lam * q)

    def D2(q, p, s):
        return (p + 2 * lam * s) / m

    def D3(q, p, s):
        return float(np.sum(2 * lam / m * (p + 2 * lam * s)))

    return DiscreteHamiltonianModel(RIGHT, Hd, 1, D1, D2, D3, name="parachute",
                                    meta={"params": params})


def parachute_closed_form_step(params: ParachuteParams, x: ContactState) -> ContactState:
    """Explicit solution of the right Hamilton equations for the parachute."""
    m, g, lam = params.m, params.g, params.lam
    q, p, s = float(x.q[0]), float(x.p[0]), x.s
    if p == 0.0:
        raise DegenerateStep("parachute closed form needs p_k != 0")
    e = math.exp(2 * lam * q)
    p1 = (m / (2 * lam)) * (1.0 - m * g * e / p) - 2 * lam * s
    q1 = (p1 + 2 * lam * s) / m
    H = (p1 + 2 * lam * s) ** 2 / (2 * m) + m * g / (2 * lam) * math.expm1(2 * lam * q)
    return ContactState([q1], [p1], s + p1 * q1 - H)


def parachute_printed_s_update(params: ParachuteParams, x: ContactState, p1):
    """Action update exactly as typeset alongside the parachute example.

    It carries ``2 lam^2 s / m`` where the Hamiltonian gives
    ``2 lam^2 s^2 / m``; see parachute_s_discrepancy.
    """
    m, g, lam = params.m, params.g, params.lam
    q, s = float(x.q[0]), x.s
    return s + p1 ** 2 / (2 * m) - 2 * lam ** 2 * s / m - m * g / (2 * lam) * math.expm1(2 * lam * q)


def parachute_s_discrepancy(params: ParachuteParams, x: ContactState):
    """Difference between the printed action update and the Hamiltonian-derived one."""
    nxt = parachute_closed_form_step(params, x)
    return parachute_printed_s_update(params, x, float(nxt.p[0])) - nxt.s


def trivial_right_hamiltonian(n=1):
    """H+_d = p.q: the right Hamilton equations reduce to the identity."""
    return DiscreteHamiltonianModel(
        RIGHT, lambda q, p, s: float(np.dot(p, q)), n,
        lambda q, p, s: p.copy(), lambda q, p, s: q.copy(), lambda q, p, s: 0.0,
        name="trivial")


def trivial_left_hamiltonian(n=1):
    """H-_d = -p.q: identity for the left Hamilton equations."""
    return DiscreteHamiltonianModel(
        LEFT, lambda p, q, s: -float(np.dot(p, q)), n,
        lambda p, q, s: -q, lambda p, q, s: -p, lambda p, q, s: 0.0,
        name="trivial-left")


# -- free particle -----------------------------------------------------------

def free_particle_lagrangian(n=1):
    return ContinuousLagrangianModel(
        lambda q, v, s: 0.5 * float(np.dot(v, v)), n,
        L_q=lambda q, v, s: np.zeros_like(q),
        L_v=lambda q, v, s: v.copy(),
        L_s=lambda q, v, s: 0.0,
        L_vv=lambda q, v, s: np.eye(n),
        L_vq=lambda q, v, s: np.zeros((n, n)),
        L_vs=lambda q, v, s: np.zeros(n),
        name="free-particle")


def free_particle_hamiltonian(n=1):
    return ContinuousHamiltonianModel(
        lambda q, p, s: 0.5 * float(np.dot(p, p)), n,
        H_q=lambda q, p, s: np.zeros_like(q),
        H_p=lambda q, p, s: p.copy(),
        H_s=lambda q, p, s: 0.0,
        name="free-particle")


def free_particle_discrete_lagrangian(h, n=1, gamma=0.0):
    """L_d = |q1 - q0|^2 / (2h) - h gamma s0."""
    h = float(h)
    return DiscreteLagrangianModel(
        lambda q0, q1, s0: float(np.dot(q1 - q0, q1 - q0)) / (2 * h) - h * gamma * s0, n,
        D1=lambda q0, q1, s0: -(q1 - q0) / h,
        D2=lambda q0, q1, s0: (q1 - q0) / h,
        D3=lambda q0, q1, s0: -h * gamma,
        D22=lambda q0, q1, s0: np.eye(n) / h,
        name="free-particle" if gamma == 0 else "damped-free-particle")


def free_particle_right_hamiltonian(h, n=1):
    """H+_d(q, p, s) = p.q + h |p|^2 / 2."""
    h = float(h)
    return DiscreteHamiltonianModel(
        RIGHT, lambda q, p, s: float(np.dot(p, q)) + 0.5 * h * float(np.dot(p, p)), n,
        lambda q, p, s: p.copy(), lambda q, p, s: q + h * p, lambda q, p, s: 0.0,
        name="free-particle")


def free_particle_left_hamiltonian(h, n=1):
    """H-_d(p, q1, s1) = -p.q1 + h |p|^2 / 2."""
    h = float(h)
    return DiscreteHamiltonianModel(
        LEFT, lambda p, q, s: -float(np.dot(p, q)) + 0.5 * h * float(np.dot(p, p)), n,
        lambda p, q, s: -q + h * p, lambda p, q, s: -p, lambda p, q, s: 0.0,
        name="free-particle-left")


# -- damped oscillator -------------------------------------------------------

def damped_oscillator_lagrangian(gamma, omega, n=1):
    """L = |v|^2/2 - omega^2 |q|^2/2 - gamma s."""
    w2 = float(omega) ** 2
    return ContinuousLagrangianModel(
        lambda q, v, s: 0.5 * float(np.dot(v, v)) - 0.5 * w2 * float(np.dot(q, q)) - gamma * s, n,
        L_q=lambda q, v, s: -w2 * q,
        L_v=lambda q, v, s: v.copy(),
        L_s=lambda q, v, s: -float(gamma),
        L_vv=lambda q, v, s: np.eye(n),
        L_vq=lambda q, v, s: np.zeros((n, n)),
        L_vs=lambda q, v, s: np.zeros(n),
        name="damped-oscillator")


def damped_oscillator_hamiltonian(gamma, omega, n=1):
    """H = |p|^2/2 + omega^2 |q|^2/2 + gamma s."""
    w2 = float(omega) ** 2
    return ContinuousHamiltonianModel(
        lambda q, p, s: 0.5 * float(np.dot(p, p)) + 0.5 * w2 * float(np.dot(q, q)) + gamma * s, n,
        H_q=lambda q, p, s: w2 * q,
        H_p=lambda q, p, s: p.copy(),
        H_s=lambda q, p, s: float(gamma),
        name="damped-oscillator")


def damped_oscillator_models(gamma, omega, h, n=1, s_stage="midpoint"):
    """(continuous L, Legendre-dual H, midpoint L_d) for the damped oscillator."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    L = damped_oscillator_lagrangian(gamma, omega, n)
    return L, damped_oscillator_hamiltonian(gamma, omega, n), midpoint_lagrangian(L, h, s_stage)


def zero_hamiltonian(n=1):
    """H = 0: the contact vector field vanishes identically."""
    return ContinuousHamiltonianModel(
        lambda q, p, s: 0.0, n,
        H_q=lambda q, p, s: np.zeros_like(q),
        H_p=lambda q, p, s: np.zeros_like(p),
        H_s=lambda q, p, s: 0.0,
        name="zero")


# -- dissipative potential well ---------------------------------------------

def well_potential(q):
    q = as_vector(q)
    return 1.0 + 0.5 * float(np.dot(q, q))


def well_hamiltonian(gamma=0.1, n=1):
    """H = |p|^2/2 + gamma s - U(q), U(q) = 1 + |q|^2/2."""
    return ContinuousHamiltonianModel(
        lambda q, p, s: 0.5 * float(np.dot(p, p)) + gamma * s - well_potential(q), n,
        H_q=lambda q, p, s: -q,
        H_p=lambda q, p, s: p.copy(),
        H_s=lambda q, p, s: float(gamma),
        name="well")


def bundled_continuous_hamiltonians():
    """Every continuous Hamiltonian shipped with the package, by name."""
    return {
        "free-particle": free_particle_hamiltonian(),
        "damped-oscillator": damped_oscillator_hamiltonian(0.1, 1.0),
        "conservative-oscillator": damped_oscillator_hamiltonian(0.0, 2.0),
        "well": well_hamiltonian(0.1),
        "zero": zero_hamiltonian(),
        "damped-oscillator-2d": damped_oscillator_hamiltonian(0.3, 1.5, n=2),
    }
