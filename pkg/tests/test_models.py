import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from contact_dhj import models as M
from contact_dhj.continuous import hamiltonian_field, integrate_rk4
from contact_dhj.core import ContactState, finite_difference_partials
from contact_dhj.discrete_hamiltonian import right_step
from contact_dhj.errors import DegenerateStep

P = M.DEFAULT_PARACHUTE


class TestParachuteParams:
    def test_default_values(self):
        assert (P.m, P.g, P.lam) == (1.0, 10.0, -0.01)
        assert M.DEFAULT_SEED == (100.0, 1.0, 1.0)

    @pytest.mark.parametrize("kw", [{"m": 0.0}, {"m": -1.0}, {"lam": 0.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            M.ParachuteParams(**kw)


class TestParachuteHamiltonian:
    def test_origin(self):
        assert M.parachute_right_hamiltonian().value([0.0], [0.0], 0.0) == 0.0

    def test_d2_unit(self):
        H = M.parachute_right_hamiltonian(M.ParachuteParams(m=2.5))
        assert H.partials([0.3], [2.5], 0.0)[1][0] == 1.0

    def test_reference_seed_value(self):
        expect = 0.5 * (1 - 0.02) ** 2 + (-500.0) * (math.exp(-2.0) - 1)
        H = M.parachute_right_hamiltonian()
        assert H.value([100.0], [1.0], 1.0) == pytest.approx(expect, rel=1e-14)

    @given(st.floats(-50, 150), st.floats(-50, 50), st.floats(-100, 100))
    def test_partials_fd(self, q, p, s):
        H = M.parachute_right_hamiltonian()
        z = np.array([q, p, s])
        fd = finite_difference_partials(lambda y: H.value(y[:1], y[1:2], y[2]), z)
        d1, d2, d3 = H.partials([q], [p], s)
        an = np.array([d1[0], d2[0], d3])
        assert np.all(np.abs(fd - an) <= 1e-5 * np.maximum(1.0, np.abs(an)))


class TestParachuteClosedForm:
    def test_matches_newton_at_seed(self):
        x = ContactState(*[[v] for v in M.DEFAULT_SEED[:2]], M.DEFAULT_SEED[2])
        a = M.parachute_closed_form_step(P, x).as_array()
        b = right_step(M.parachute_right_hamiltonian(), x).as_array()
        assert np.all(np.abs(a - b) <= 1e-10)

    @given(st.floats(-50, 150), st.floats(0.5, 20), st.floats(-5, 5))
    def test_action_increment_algebra(self, q, p, s):
        lam, m, g = P.lam, P.m, P.g
        x = ContactState([q], [p], s)
        y = M.parachute_closed_form_step(P, x)
        expect = (y.p[0] ** 2 - 4 * lam ** 2 * s ** 2) / (2 * m) - m * g / (2 * lam) * math.expm1(2 * lam * q)
        assert y.s - s == pytest.approx(expect, rel=1e-9, abs=1e-9)

    def test_zero_momentum(self):
        with pytest.raises(DegenerateStep):
            M.parachute_closed_form_step(P, ContactState([100.0], [0.0], 1.0))

    def test_printed_update_discrepancy(self):
        x = ContactState([100.0], [1.0], 3.0)
        lam, m, s = P.lam, P.m, 3.0
        expect = -2 * lam ** 2 * s / m + 2 * lam ** 2 * s ** 2 / m
        assert M.parachute_s_discrepancy(P, x) == pytest.approx(expect, rel=1e-6)
        # at s = 0 or s = 1 the two readings coincide
        assert abs(M.parachute_s_discrepancy(P, ContactState([100.0], [1.0], 1.0))) < 1e-9


class TestDescentShape:
    def test_descent_until_ground(self):
        x = ContactState([100.0], [1.0], 1.0)
        qs, ps = [100.0], [1.0]
        while qs[-1] > 0:
            x = M.parachute_closed_form_step(P, x)
            qs.append(x.q[0])
            ps.append(x.p[0])
        assert np.all(np.diff(qs) < 0)
        signs = np.sign(np.diff(ps))
        assert np.count_nonzero(np.diff(signs)) == 1 and signs[0] > 0


class TestDampedOscillator:
    def test_bad_step(self):
        with pytest.raises(ValueError):
            M.damped_oscillator_models(0.1, 1.0, 0.0)

    def test_conservative(self):
        _, H, _ = M.damped_oscillator_models(0.0, 1.5, 0.01)
        traj = integrate_rk4(hamiltonian_field(H), ContactState([1.0], [0.2], 0.0), 0.01, 500)
        e = np.array([H.value(x.q, x.p, x.s) for x in traj.states])
        assert np.ptp(e) < 1e-9

    def test_exponential_decay(self):
        gamma = 0.3
        _, H, _ = M.damped_oscillator_models(gamma, 1.0, 0.01)
        traj = integrate_rk4(hamiltonian_field(H), ContactState([1.0], [0.5], 0.2), 0.01, 300)
        e = np.array([H.value(x.q, x.p, x.s) for x in traj.states])
        np.testing.assert_allclose(e, e[0] * np.exp(-gamma * traj.times), rtol=1e-9)

    def test_legendre_consistency(self, rng):
        L, H, _ = M.damped_oscillator_models(0.2, 1.0, 0.01)
        for q, v, s in rng.uniform(-3, 3, (100, 3)):
            p = L.gradient([q], [v], s)[1][0]
            assert p == v
            assert H.value([q], [p], s) == pytest.approx(v * p - L.value([q], [v], s), abs=1e-13)


class TestOtherModels:
    def test_free_particle_discrete_hamiltonians(self, rng):
        h = 0.2
        for H in (M.free_particle_right_hamiltonian(h), M.free_particle_left_hamiltonian(h),
                  M.trivial_right_hamiltonian(), M.trivial_left_hamiltonian()):
            for z in rng.uniform(-2, 2, (20, 3)):
                fd = finite_difference_partials(lambda y: H.value(y[:1], y[1:2], y[2]), z)
                d1, d2, d3 = H.partials(z[:1], z[1:2], z[2])
                np.testing.assert_allclose(fd, [d1[0], d2[0], d3], atol=1e-8)

    def test_well(self):
        H = M.well_hamiltonian(0.1)
        assert H.value([0.0], [0.0], 0.0) == -1.0
        assert M.well_potential([2.0]) == 3.0

    def test_bundled(self):
        models = M.bundled_continuous_hamiltonians()
        assert len(models) == 6
        assert models["damped-oscillator-2d"].n == 2
