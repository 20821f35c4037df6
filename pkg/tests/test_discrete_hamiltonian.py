import numpy as np
import pytest
from hypothesis import given, strategies as st

from contact_dhj import models as M
from contact_dhj.core import RIGHT, ContactState, DiscreteHamiltonianModel, finite_difference_partials
from contact_dhj.discrete_hamiltonian import (left_step, right_from_lagrangian, right_step,
                                              run_trajectory)
from contact_dhj.discrete_lagrangian import lagrangian_flow_tilde
from contact_dhj.errors import DegenerateStep, NewtonDiverged, StepError
from contact_dhj.hamilton_jacobi import (GeneratingFunctionGrid, hj_residual_left,
                                         propagate_generating_function)

val = st.floats(-50, 50, allow_nan=False)


def lagrangians(h=0.05):
    return {
        "free-particle": M.free_particle_discrete_lagrangian(h),
        "damped-free-particle": M.free_particle_discrete_lagrangian(h, gamma=0.6),
        "damped-oscillator": M.damped_oscillator_models(0.4, 1.2, h)[2],
    }


class TestTrivial:
    @given(val, val, val)
    def test_right_identity(self, q, p, s):
        x = ContactState([q], [p], s)
        assert np.all(right_step(M.trivial_right_hamiltonian(), x).as_array() == x.as_array())

    @given(val, val, val)
    def test_left_identity(self, q, p, s):
        x = ContactState([q], [p], s)
        np.testing.assert_allclose(left_step(M.trivial_left_hamiltonian(), x).as_array(),
                                   x.as_array(), rtol=0, atol=1e-12 * max(1, abs(p * q), abs(s)))

    def test_constant_trajectory(self):
        x0 = ContactState([0.3, -1.0], [2.0, 0.5], 4.0)
        traj = run_trajectory(M.trivial_right_hamiltonian(2), x0, 10)
        assert len(traj) == 11
        assert np.all(traj.array == x0.as_array())

    def test_side_mismatch(self):
        with pytest.raises(ValueError):
            right_step(M.trivial_left_hamiltonian(), ContactState([0.0], [0.0], 0.0))
        with pytest.raises(ValueError):
            left_step(M.trivial_right_hamiltonian(), ContactState([0.0], [0.0], 0.0))


class TestRightStep:
    def test_parachute_one_step(self):
        x = ContactState([100.0], [1.0], 1.0)
        a = right_step(M.parachute_right_hamiltonian(), x).as_array()
        b = M.parachute_closed_form_step(M.DEFAULT_PARACHUTE, x).as_array()
        assert np.all(np.abs(a - b) <= 1e-10 * np.maximum(1, np.abs(b)))

    def test_degenerate(self):
        H = DiscreteHamiltonianModel(RIGHT, lambda q, p, s: float(p @ q) + s, 1,
                                     lambda q, p, s: p.copy(), lambda q, p, s: q.copy(),
                                     lambda q, p, s: 1.0)
        with pytest.raises(DegenerateStep):
            right_step(H, ContactState([1.0], [2.0], 0.0))

    def test_no_root(self):
        H = DiscreteHamiltonianModel(RIGHT, lambda q, p, s: float(q[0] * (p[0] ** 2 + 1)), 1,
                                     lambda q, p, s: p ** 2 + 1, lambda q, p, s: 2 * q * p,
                                     lambda q, p, s: 0.0)
        with pytest.raises(NewtonDiverged) as info:
            right_step(H, ContactState([1.0], [-1.0], 0.0))
        assert info.value.trace[0] == pytest.approx(3.0)
        assert min(info.value.trace) >= 2.0 - 1e-6

    def test_s_update_definition(self):
        H = M.parachute_right_hamiltonian()
        x = ContactState([100.0], [1.0], 1.0)
        y = right_step(H, x)
        assert y.s == x.s + (y.p[0] * y.q[0] - H.value(x.q, y.p, x.s))

    def test_step_error_index(self):
        with pytest.raises(StepError) as info:
            run_trajectory(M.parachute_right_hamiltonian(), ContactState([100.0], [1.0], 1.0), 20)
        assert info.value.step == 8
        assert isinstance(info.value.cause, DegenerateStep)

    def test_run_trajectory_s_consistency(self):
        H = M.free_particle_right_hamiltonian(0.1)
        traj = run_trajectory(H, ContactState([0.0], [1.0], 0.0), 5, h=0.1)
        for k in range(5):
            q, p, s = traj.array[k]
            q1, p1, s1 = traj.array[k + 1]
            assert s1 == s + (p1 * q1 - H.value([q], [p1], s))
        np.testing.assert_allclose(traj.times, 0.1 * np.arange(6))

    def test_bad_steps(self):
        with pytest.raises(ValueError):
            run_trajectory(M.trivial_right_hamiltonian(), ContactState([0.0], [0.0], 0.0), 0)


class TestLeftStep:
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
    def test_free_particle_matches_right(self, q, p, s):
        h = 0.1
        x = ContactState([q], [p], s)
        a = run_trajectory(M.free_particle_left_hamiltonian(h), x, 10).array
        b = run_trajectory(M.free_particle_right_hamiltonian(h), x, 10).array
        assert np.max(np.abs(a - b)) <= 1e-9

    def test_left_hj_consistency(self):
        h = 0.1
        H = M.free_particle_left_hamiltonian(h)
        nodes = np.linspace(-1, 1, 201)
        S = GeneratingFunctionGrid(nodes, 0.5 * nodes ** 2, nodes.copy())
        worst = 0.0
        for _ in range(5):
            S1 = propagate_generating_function(H, S)
            for q0, q1 in zip(S1.origin[2:-2], S1.nodes[2:-2]):
                worst = max(worst, abs(hj_residual_left(H, S, S1, q0, q1)))
            S = S1
        assert worst <= 1e-9


class TestFromLagrangian:
    def test_free_particle_closed_form(self, rng):
        h = 0.1
        H = right_from_lagrangian(M.free_particle_discrete_lagrangian(h))
        for q, p, s in rng.uniform(-2, 2, (20, 3)):
            assert H.value([q], [p], s) == pytest.approx(p * q + h * p * p / 2, abs=1e-12)
            assert H.partials([q], [p], s)[1][0] == pytest.approx(q + h * p, abs=1e-12)

    @pytest.mark.parametrize("name", sorted(lagrangians()))
    def test_d2_is_psi(self, name, rng):
        H = right_from_lagrangian(lagrangians()[name])
        psi = H.meta["psi"]
        for q, p, s in rng.uniform(-1, 1, (10, 3)):
            assert abs(H.partials([q], [p], s)[1][0] - psi([q], [p], s)[0]) <= 1e-10

    @pytest.mark.parametrize("name", sorted(lagrangians()))
    def test_partial_identities_fd(self, name, rng):
        H = right_from_lagrangian(lagrangians()[name])
        for z in rng.uniform(-1, 1, (10, 3)):
            fd = finite_difference_partials(lambda y: H.value(y[:1], y[1:2], y[2]), z)
            d1, d2, d3 = H.partials(z[:1], z[1:2], z[2])
            an = np.array([d1[0], d2[0], d3])
            assert np.max(np.abs(fd - an)) <= 1e-8 * max(1.0, np.max(np.abs(an)))

    @pytest.mark.parametrize("name", sorted(lagrangians()))
    def test_matches_lagrangian_flow(self, name):
        Ld = lagrangians()[name]
        H = right_from_lagrangian(Ld)
        x = y = ContactState([0.8], [-0.3], 0.2)
        for _ in range(30):
            x = right_step(H, x)
            y = lagrangian_flow_tilde(Ld, y)
            assert np.max(np.abs(x.as_array() - y.as_array())) <= 1e-9
