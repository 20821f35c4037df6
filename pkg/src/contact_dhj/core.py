"""State types, model containers and coordinate-level contact geometry.

Everything lives on the extended phase space T*Q x R in Darboux
coordinates (q, p, s), with contact form ``ds - p . dq``.  Vectors are
dense float arrays of a fixed dimension ``n``; scalars are Python floats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, NonFiniteError, RegularityViolated

EPS = np.finfo(float).eps
FD_SCALE = np.cbrt(EPS)


def as_vector(x, name="x"):
    v = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if v.ndim != 1:
        raise DimensionError(f"{name} must be a 1-D vector, got shape {v.shape}")
    v.setflags(write=False)
    return v


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} is not finite: {arr!r}")


@dataclass(frozen=True)
class ContactState:
    """A point (q, p, s) of T*Q x R."""

    q: np.ndarray
    p: np.ndarray
    s: float

    def __post_init__(self):
        q = as_vector(self.q, "q")
        p = as_vector(self.p, "p")
        if q.shape != p.shape:
            raise DimensionError(f"dim(q)={q.size} != dim(p)={p.size}")
        s = float(self.s)
        _check_finite(q, "q")
        _check_finite(p, "p")
        _check_finite(np.array(s), "s")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "s", s)

    @property
    def n(self):
        return self.q.size

    def as_array(self):
        return np.concatenate([self.q, self.p, [self.s]])

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        if x.size % 2 != 1:
            raise DimensionError(f"packed state must have odd length, got {x.size}")
        n = (x.size - 1) // 2
        return cls(x[:n], x[n:2 * n], x[-1])


@dataclass(frozen=True)
class VelocityState:
    """A point (q, v, s) of TQ x R."""

    q: np.ndarray
    v: np.ndarray
    s: float

    def __post_init__(self):
        q = as_vector(self.q, "q")
        v = as_vector(self.v, "v")
        if q.shape != v.shape:
            raise DimensionError(f"dim(q)={q.size} != dim(v)={v.size}")
        s = float(self.s)
        _check_finite(q, "q")
        _check_finite(v, "v")
        _check_finite(np.array(s), "s")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "s", s)

    @property
    def n(self):
        return self.q.size

    def as_array(self):
        return np.concatenate([self.q, self.v, [self.s]])

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        n = (x.size - 1) // 2
        return cls(x[:n], x[n:2 * n], x[-1])


@dataclass(frozen=True)
class Tangent:
    """A tangent vector (dq, dp, ds) at some point of T*Q x R."""

    dq: np.ndarray
    dp: np.ndarray
    ds: float

    def __post_init__(self):
        dq = as_vector(self.dq, "dq")
        dp = as_vector(self.dp, "dp")
        if dq.shape != dp.shape:
            raise DimensionError(f"dim(dq)={dq.size} != dim(dp)={dp.size}")
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "dp", dp)
        object.__setattr__(self, "ds", float(self.ds))

    def as_array(self):
        return np.concatenate([self.dq, self.dp, [self.ds]])

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        n = (x.size - 1) // 2
        return cls(x[:n], x[n:2 * n], x[-1])


def contact_form_pairing(state: ContactState, t: Tangent) -> float:
    """Evaluate the contact form ``ds - p . dq`` of ``state`` on ``t``."""
    if state.p.shape != t.dq.shape:
        raise DimensionError(
            f"state has dimension {state.p.size}, tangent has {t.dq.size}")
    return t.ds - float(np.dot(state.p, t.dq))


def reeb_field(n: int) -> Tangent:
    """The Reeb field d/ds in Darboux coordinates."""
    if n < 1:
        raise DimensionError(f"dimension must be >= 1, got {n}")
    return Tangent(np.zeros(n), np.zeros(n), 1.0)


def default_fd_step(x):
    return FD_SCALE * np.maximum(1.0, np.abs(x))


def finite_difference_partials(f, x, h_fd=None):
    """Central-difference gradient of a scalar field ``f`` at ``x``.

    ``h_fd`` may be a scalar or per-coordinate array; by default it is
    cbrt(eps) * max(1, |x_i|).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    steps = default_fd_step(x) if h_fd is None else np.broadcast_to(
        np.asarray(h_fd, dtype=float), x.shape)
    if np.any(steps <= 0):
        raise ValueError("finite-difference step must be positive")
    grad = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        fp, fm = f(xp), f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteError(
                f"non-finite evaluation while differentiating coordinate {i}", index=i)
        grad[i] = (fp - fm) / (xp[i] - xm[i])
    return grad


def finite_difference_jacobian(F, x, h_fd=None):
    """Central-difference Jacobian of a vector field ``F`` (rows = outputs)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    steps = default_fd_step(x) if h_fd is None else np.broadcast_to(
        np.asarray(h_fd, dtype=float), x.shape)
    cols = []
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        fp = np.atleast_1d(F(xp))
        fm = np.atleast_1d(F(xm))
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NonFiniteError(
                f"non-finite evaluation while differentiating coordinate {i}", index=i)
        cols.append((fp - fm) / (xp[i] - xm[i]))
    return np.column_stack(cols)


def _mixed_second_differences(f, x, rows):
    """Rows d^2 f / dx_i dx_j (i in ``rows``, all j) by the four-point stencil.

    The step eps**(1/4) * max(1, |x|) balances truncation and round-off for
    second derivatives.
    """
    steps = np.finfo(float).eps ** 0.25 * np.maximum(1.0, np.abs(x))
    out = np.empty((len(rows), x.size))
    for r, i in enumerate(rows):
        for j in range(x.size):
            acc = 0.0
            for si, sj, sign in ((1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)):
                z = x.copy()
                z[i] += si * steps[i]
                z[j] += sj * steps[j]
                fz = f(z)
                if not np.isfinite(fz):
                    raise NonFiniteError(
                        f"non-finite evaluation while differentiating coordinate {j}", index=j)
                acc += sign * fz
            out[r, j] = acc / (4.0 * steps[i] * steps[j])
    return out


def _split(x, n):
    return x[:n], x[n:2 * n], x[2 * n]


@dataclass(frozen=True)
class ContinuousHamiltonianModel:
    """H(q, p, s) with optional analytic partials H_q, H_p, H_s."""

    H: Callable
    n: int
    H_q: Optional[Callable] = None
    H_p: Optional[Callable] = None
    H_s: Optional[Callable] = None
    name: str = "hamiltonian"

    def value(self, q, p, s):
        return float(self.H(as_vector(q), as_vector(p), float(s)))

    def _fd(self, q, p, s):
        n = self.n
        x = np.concatenate([as_vector(q), as_vector(p), [float(s)]])
        return finite_difference_partials(lambda z: self.H(*_split(z, n)), x)

    def partials(self, q, p, s):
        """Return (H_q, H_p, H_s) at (q, p, s)."""
        q, p, s = as_vector(q), as_vector(p), float(s)
        g = None
        if self.H_q is None or self.H_p is None or self.H_s is None:
            g = self._fd(q, p, s)
        n = self.n
        Hq = as_vector(self.H_q(q, p, s)) if self.H_q else g[:n]
        Hp = as_vector(self.H_p(q, p, s)) if self.H_p else g[n:2 * n]
        Hs = float(self.H_s(q, p, s)) if self.H_s else float(g[2 * n])
        return Hq, Hp, Hs


@dataclass(frozen=True)
class ContinuousLagrangianModel:
    """L(q, v, s) with optional analytic first and second derivatives.

    Second-derivative blocks: ``L_vv`` (n x n), ``L_vq`` (entry [i, j] is
    d^2 L / dv_i dq_j) and ``L_vs`` (n-vector).  Missing blocks fall back to
    central differences of ``L_v``, or to a mixed second-difference stencil
    on ``L`` itself when ``L_v`` is not supplied either.
    """

    L: Callable
    n: int
    L_q: Optional[Callable] = None
    L_v: Optional[Callable] = None
    L_s: Optional[Callable] = None
    L_vv: Optional[Callable] = None
    L_vq: Optional[Callable] = None
    L_vs: Optional[Callable] = None
    name: str = "lagrangian"

    def value(self, q, v, s):
        return float(self.L(as_vector(q), as_vector(v), float(s)))

    def gradient(self, q, v, s):
        """Return (L_q, L_v, L_s)."""
        q, v, s = as_vector(q), as_vector(v), float(s)
        n = self.n
        g = None
        if self.L_q is None or self.L_v is None or self.L_s is None:
            x = np.concatenate([q, v, [s]])
            g = finite_difference_partials(lambda z: self.L(*_split(z, n)), x)
        Lq = as_vector(self.L_q(q, v, s)) if self.L_q else g[:n]
        Lv = as_vector(self.L_v(q, v, s)) if self.L_v else g[n:2 * n]
        Ls = float(self.L_s(q, v, s)) if self.L_s else float(g[2 * n])
        return Lq, Lv, Ls

    def _Lv(self, q, v, s):
        return self.gradient(q, v, s)[1]

    def second_blocks(self, q, v, s):
        """Return (L_vv, L_vq, L_vs)."""
        q, v, s = as_vector(q), as_vector(v), float(s)
        n = self.n
        J = None
        if self.L_vv is None or self.L_vq is None or self.L_vs is None:
            x = np.concatenate([q, v, [s]])
            if self.L_v is None:
                J = _mixed_second_differences(lambda z: self.L(*_split(z, n)), x, range(n, 2 * n))
            else:
                J = finite_difference_jacobian(lambda z: self._Lv(*_split(z, n)), x)
        Lvv = np.atleast_2d(self.L_vv(q, v, s)) if self.L_vv else J[:, n:2 * n]
        Lvq = np.atleast_2d(self.L_vq(q, v, s)) if self.L_vq else J[:, :n]
        Lvs = as_vector(self.L_vs(q, v, s)) if self.L_vs else J[:, 2 * n]
        return Lvv, Lvq, Lvs


@dataclass(frozen=True)
class DiscreteLagrangianModel:
    """L_d(q0, q1, s0) with partials D1, D2 (vectors), D3 (scalar).

    ``D22`` is the Hessian of L_d in its second slot; it falls back to
    central differences of ``D2`` when not supplied.
    """

    Ld: Callable
    n: int
    D1: Optional[Callable] = None
    D2: Optional[Callable] = None
    D3: Optional[Callable] = None
    D22: Optional[Callable] = None
    name: str = "discrete-lagrangian"

    def value(self, q0, q1, s0):
        return float(self.Ld(as_vector(q0), as_vector(q1), float(s0)))

    def partials(self, q0, q1, s0):
        """Return (D1 L_d, D2 L_d, D3 L_d) at (q0, q1, s0)."""
        q0, q1, s0 = as_vector(q0), as_vector(q1), float(s0)
        n = self.n
        g = None
        if self.D1 is None or self.D2 is None or self.D3 is None:
            x = np.concatenate([q0, q1, [s0]])
            g = finite_difference_partials(lambda z: self.Ld(*_split(z, n)), x)
        d1 = as_vector(self.D1(q0, q1, s0)) if self.D1 else g[:n]
        d2 = as_vector(self.D2(q0, q1, s0)) if self.D2 else g[n:2 * n]
        d3 = float(self.D3(q0, q1, s0)) if self.D3 else float(g[2 * n])
        return d1, d2, d3

    def hessian22(self, q0, q1, s0):
        q0, q1, s0 = as_vector(q0), as_vector(q1), float(s0)
        if self.D22 is not None:
            return np.atleast_2d(self.D22(q0, q1, s0))
        return finite_difference_jacobian(
            lambda z: self.partials(q0, z, s0)[1], q1)

    def check_reeb_factor(self, q0, q1, s0, tol=1e-12):
        """Return 1 + D3 L_d, raising RegularityViolated if it is ~0."""
        factor = 1.0 + self.partials(q0, q1, s0)[2]
        if abs(factor) < tol:
            raise RegularityViolated(
                f"1 + D3 L_d = {factor:.3e} vanishes at q0={q0}, q1={q1}, s0={s0}")
        return factor


RIGHT = "right"
LEFT = "left"


@dataclass(frozen=True)
class DiscreteHamiltonianModel:
    """A right or left discrete contact Hamiltonian H_d(a, b, c).

    Right: (a, b, c) = (q_k, p_{k+1}, s_k).  Left: (a, b, c) =
    (p_k, q_{k+1}, s_{k+1}).
    """

    side: str
    Hd: Callable
    n: int
    D1: Optional[Callable] = None
    D2: Optional[Callable] = None
    D3: Optional[Callable] = None
    name: str = "discrete-hamiltonian"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.side not in (RIGHT, LEFT):
            raise ValueError(f"side must be 'right' or 'left', got {self.side!r}")

    def value(self, a, b, c):
        return float(self.Hd(as_vector(a), as_vector(b), float(c)))

    def partials(self, a, b, c):
        """Return (D1 H_d, D2 H_d, D3 H_d) at (a, b, c)."""
        a, b, c = as_vector(a), as_vector(b), float(c)
        n = self.n
        g = None
        if self.D1 is None or self.D2 is None or self.D3 is None:
            x = np.concatenate([a, b, [c]])
            g = finite_difference_partials(lambda z: self.Hd(*_split(z, n)), x)
        d1 = as_vector(self.D1(a, b, c)) if self.D1 else g[:n]
        d2 = as_vector(self.D2(a, b, c)) if self.D2 else g[n:2 * n]
        d3 = float(self.D3(a, b, c)) if self.D3 else float(g[2 * n])
        return d1, d2, d3
