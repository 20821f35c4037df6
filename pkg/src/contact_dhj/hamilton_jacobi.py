"""Continuous and discrete Hamilton-Jacobi machinery for contact dynamics.

Generating functions S^k live on 1-D grids as cubic Hermite interpolants of
(S, dS) node pairs, so dS is exact at nodes.  Grids are propagated by the
method of characteristics: each node is lifted to (q, dS(q), S(q)), pushed
through the discrete Hamiltonian flow and re-read as a graph over Q.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .core import (RIGHT, ContactState, ContinuousHamiltonianModel,
                   DiscreteHamiltonianModel, as_vector, finite_difference_jacobian,
                   finite_difference_partials)
from .continuous import contact_vector_field
from .discrete_hamiltonian import right_step, step
from .errors import CausticError, DomainError
from .newton import newton

DEFAULT_GRID_N = 401
BOUNDARY_MARGIN = 2


@dataclass(frozen=True)
class GeneratingFunctionGrid:
    """S tabulated with its derivative on strictly increasing nodes.

    ``origin`` optionally records, for each node, the node of the previous
    grid it was propagated from.
    """

    nodes: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    origin: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        y = np.asarray(self.values, dtype=float)
        d = np.asarray(self.derivs, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("need a 1-D grid with at least two nodes")
        if y.shape != x.shape or d.shape != x.shape:
            raise ValueError("nodes, values and derivs must have equal length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(d))):
            raise ValueError("grid contains non-finite entries")
        for a in (x, y, d):
            a.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "derivs", d)
        object.__setattr__(self, "_spline", CubicHermiteSpline(x, y, d, extrapolate=False))

    @property
    def domain(self):
        return float(self.nodes[0]), float(self.nodes[-1])

    def _check(self, q):
        q = float(np.atleast_1d(q)[0])
        lo, hi = self.domain
        if not lo <= q <= hi:
            raise DomainError(f"q = {q!r} outside grid domain [{lo!r}, {hi!r}]")
        return q

    def _node_index(self, q):
        i = np.searchsorted(self.nodes, q)
        if i < self.nodes.size and self.nodes[i] == q:
            return i
        return None

    def S(self, q):
        q = self._check(q)
        i = self._node_index(q)
        return float(self.values[i]) if i is not None else float(self._spline(q))

    def dS(self, q):
        q = self._check(q)
        i = self._node_index(q)
        return float(self.derivs[i]) if i is not None else float(self._spline(q, 1))

    def d2S(self, q):
        q = self._check(q)
        return float(self._spline(q, 2))

    def interior(self, margin=BOUNDARY_MARGIN):
        return self.nodes[margin:self.nodes.size - margin]

    def perturbed(self, eps):
        """S + eps * q (dS shifts by eps)."""
        return GeneratingFunctionGrid(self.nodes, self.values + eps * self.nodes,
                                      self.derivs + eps, self.origin)

    def to_csv(self, fh=None):
        """Write columns q,S,dS with 17 significant digits; returns the text if fh is None."""
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["q", "S", "dS"])
        for row in zip(self.nodes, self.values, self.derivs):
            w.writerow([format(v, ".17g") for v in row])
        return out.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, fh):
        rows = list(csv.DictReader(fh))
        return cls(np.array([float(r["q"]) for r in rows]),
                   np.array([float(r["S"]) for r in rows]),
                   np.array([float(r["dS"]) for r in rows]))

    @classmethod
    def affine(cls, q0, s0, p0, qmin, qmax, n=DEFAULT_GRID_N):
        """S(q) = s0 + p0 (q - q0) on n uniform nodes of [qmin, qmax]."""
        nodes = np.linspace(qmin, qmax, n)
        return cls(nodes, s0 + p0 * (nodes - q0), np.full(n, float(p0)))

    @classmethod
    def from_function(cls, F, dF, nodes):
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, np.array([F(x) for x in nodes]), np.array([dF(x) for x in nodes]))


def lift(S: GeneratingFunctionGrid, q) -> ContactState:
    """gamma(q) = (q, dS(q), S(q))."""
    return ContactState([q], [S.dS(q)], S.S(q))


# -- continuous theory -------------------------------------------------------

@dataclass(frozen=True)
class Section:
    """gamma = (q, F_q, F(q)) for a function F on Q.

    ``F_qq`` (Hessian) falls back to central differences of ``F_q``.
    """

    F: Callable
    F_q: Callable
    F_qq: Optional[Callable] = None

    def value(self, q):
        return float(self.F(as_vector(q)))

    def grad(self, q):
        return as_vector(self.F_q(as_vector(q)))

    def hess(self, q):
        q = as_vector(q)
        if self.F_qq is not None:
            return np.atleast_2d(self.F_qq(q))
        return finite_difference_jacobian(self.grad, q)

    def lift(self, q) -> ContactState:
        return ContactState(q, self.grad(q), self.value(q))


def continuous_hj_residual(H: ContinuousHamiltonianModel, gamma: Section, q):
    """(H o gamma)(q) and its gradient over q."""
    q = as_vector(q)
    hg = lambda z: H.value(z, gamma.grad(z), gamma.value(z))
    return hg(q), finite_difference_partials(hg, q)


def gamma_relatedness_gap(H: ContinuousHamiltonianModel, gamma: Section, q):
    """Max |T gamma(X_H^gamma) - X_H(gamma)| over the fibre components at q.

    The q-components agree identically; the p- and s-components differ by
    F_qq H_p + H_q + H_s F_q and by H(gamma(q)) respectively.
    """
    x = gamma.lift(q)
    xh = contact_vector_field(H, x)
    qdot = xh.dq
    pushed = np.concatenate([qdot, gamma.hess(q) @ qdot, [float(np.dot(gamma.grad(q), qdot))]])
    return float(np.max(np.abs(pushed - xh.as_array())))


# -- discrete theory ---------------------------------------------------------

def hj_residual_right(H: DiscreteHamiltonianModel, S_k, S_k1, q_k, q_k1):
    """Right discrete HJ residual at the pair (q_k, q_{k+1})."""
    p1 = S_k1.dS(q_k1)
    q1 = float(np.atleast_1d(q_k1)[0])
    return S_k1.S(q_k1) - S_k.S(q_k) - p1 * q1 + H.value(q_k, p1, S_k.S(q_k))


def hj_residual_left(H: DiscreteHamiltonianModel, S_k, S_k1, q_k, q_k1):
    """Left discrete HJ residual; H- takes (p_k, q_{k+1}, s_{k+1})."""
    p0 = S_k.dS(q_k)
    q0 = float(np.atleast_1d(q_k)[0])
    return S_k1.S(q_k1) - S_k.S(q_k) + p0 * q0 + H.value(p0, q_k1, S_k1.S(q_k1))


def hj_residual_scale(H, S_k, S_k1, q_k, q_k1):
    """Magnitude of the largest term in the right residual (round-off yardstick)."""
    p1 = S_k1.dS(q_k1)
    q1 = float(np.atleast_1d(q_k1)[0])
    terms = [S_k1.S(q_k1), S_k.S(q_k), p1 * q1, H.value(q_k, p1, S_k.S(q_k))]
    return max(1.0, max(abs(t) for t in terms))


def propagate_generating_function(H: DiscreteHamiltonianModel, S_k: GeneratingFunctionGrid,
                                  step_index=None) -> GeneratingFunctionGrid:
    """Push every node of S_k through the discrete flow of H.

    The new grid has nodes q', values s' and derivatives p' of the stepped
    lifts, sorted increasingly.  Raises CausticError when the images are
    not strictly monotone in the original node order.
    """
    out = np.array([step(H, lift(S_k, q)).as_array() for q in S_k.nodes])
    qn, pn, sn = out[:, 0], out[:, 1], out[:, 2]
    dq = np.diff(qn)
    if np.all(dq > 0):
        order = np.arange(qn.size)
    elif np.all(dq < 0):
        order = np.arange(qn.size)[::-1]
    else:
        bad = int(np.argmax(np.sign(dq) != np.sign(dq[0])))
        raise CausticError(f"characteristics cross between nodes {bad} and {bad + 1}",
                           step=step_index)
    return GeneratingFunctionGrid(qn[order], sn[order], pn[order], origin=S_k.nodes[order])


def projected_flow(H: DiscreteHamiltonianModel, S_k, S_k1, q_k, seed=None):
    """q_{k+1} solving q_{k+1} = D2 H+(q_k, dS^{k+1}(q_{k+1}), S^k(q_k))."""
    q_k = float(np.atleast_1d(q_k)[0])
    s_k = S_k.S(q_k)

    def G(z):
        return z - H.partials([q_k], [S_k1.dS(z[0])], s_k)[1]

    if seed is None:
        seed = right_step(H, lift(S_k, q_k)).q[0]
    lo, hi = S_k1.domain
    seed = min(max(float(seed), lo), hi)
    z, _, _ = newton(G, [seed], fscale=max(1.0, abs(seed)), what="projected_flow")
    return float(z[0])


def _commutation_gap(H, S_k, S_k1, q):
    lhs = right_step(H, lift(S_k, q))
    qn = projected_flow(H, S_k, S_k1, q, seed=lhs.q[0])
    rhs = lift(S_k1, qn)
    return float(np.max(np.abs(lhs.as_array() - rhs.as_array()))), qn


def commutation_check(H: DiscreteHamiltonianModel, S_k, S_k1, probe_points,
                      skip_out_of_domain=False):
    """max |Phi~(gamma^k(q)) - gamma^{k+1}(projected_flow(q))| over probes.

    With ``skip_out_of_domain`` probes whose projected image leaves the
    domain of S_k1 are ignored; if every probe leaves, the result is inf.
    """
    if H.side != RIGHT:
        raise ValueError("commutation_check is defined for right Hamiltonians")
    worst, used = 0.0, 0
    for q in probe_points:
        try:
            gap, _ = _commutation_gap(H, S_k, S_k1, q)
        except DomainError:
            if not skip_out_of_domain:
                raise
            continue
        worst = max(worst, gap)
        used += 1
    return worst if used else float("inf")


def momentum_condition_residual(H, S_k, S_k1, q_k, q_k1=None):
    """dS^k(q_k) - D1 H / (1 - D3 H) at (q_k, dS^{k+1}(q_{k+1}), S^k(q_k))."""
    if q_k1 is None:
        q_k1 = projected_flow(H, S_k, S_k1, q_k)
    d1, _, d3 = H.partials([q_k], [S_k1.dS(q_k1)], S_k.S(q_k))
    return float(S_k.dS(q_k) - d1[0] / (1.0 - d3))


@dataclass(frozen=True)
class HJStepReport:
    k: int
    max_residual: float
    max_scaled_residual: float
    max_commutation: float
    max_momentum_condition: float
    n_probes: int
    n_out_of_domain: int


def hj_step_report(H, S_k, S_k1, k, margin=BOUNDARY_MARGIN):
    """HJ residual, commutation gap and momentum condition over interior nodes of S_k.

    Each probe is paired with its projected-flow image.  Probes whose image
    leaves the domain of S_k1 are counted, not evaluated; when no probe
    survives every maximum is inf.
    """
    res = sres = mom = comm = 0.0
    probes = S_k.interior(margin)
    skipped = 0
    for q in probes:
        try:
            gap, qn = _commutation_gap(H, S_k, S_k1, q)
        except DomainError:
            skipped += 1
            continue
        r = hj_residual_right(H, S_k, S_k1, q, qn)
        res = max(res, abs(r))
        sres = max(sres, abs(r) / hj_residual_scale(H, S_k, S_k1, q, qn))
        mom = max(mom, abs(momentum_condition_residual(H, S_k, S_k1, q, qn)))
        comm = max(comm, gap)
    if skipped == len(probes):
        res = sres = mom = comm = float("inf")
    return HJStepReport(k, res, sres, comm, mom, len(probes), skipped)
