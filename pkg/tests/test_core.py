import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from contact_dhj import models as M
from contact_dhj.core import (ContactState, ContinuousHamiltonianModel, DiscreteLagrangianModel,
                              Tangent, VelocityState, contact_form_pairing, default_fd_step,
                              finite_difference_partials, reeb_field)
from contact_dhj.errors import DimensionError, NonFiniteError, RegularityViolated

finite = st.floats(-1e3, 1e3, allow_nan=False)


class TestStateTypes:
    def test_contact_state_roundtrip(self):
        x = ContactState([1.0, 2.0], [3.0, 4.0], 5.0)
        y = ContactState.from_array(x.as_array())
        assert y.n == 2
        np.testing.assert_array_equal(x.as_array(), y.as_array())

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            ContactState([1.0, 2.0], [3.0], 0.0)
        with pytest.raises(DimensionError):
            VelocityState([1.0], [1.0, 2.0], 0.0)
        with pytest.raises(DimensionError):
            Tangent([1.0], [], 0.0)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(NonFiniteError):
            ContactState([bad], [0.0], 0.0)
        with pytest.raises(NonFiniteError):
            ContactState([0.0], [0.0], bad)

    def test_immutable(self):
        x = ContactState([1.0], [2.0], 3.0)
        with pytest.raises(ValueError):
            x.q[0] = 5.0


class TestContactForm:
    def test_zero_momentum(self):
        x = ContactState([0.3], [0.0], 0.0)
        assert contact_form_pairing(x, Tangent([5.0], [0.0], 1.0)) == 1.0

    def test_reeb_pairing(self):
        x = ContactState([0.3], [17.5], -2.0)
        assert contact_form_pairing(x, reeb_field(1)) == 1.0

    def test_pure_dq(self):
        x = ContactState([0.0], [1.0], 0.0)
        assert contact_form_pairing(x, Tangent([1.0], [0.0], 0.0)) == -1.0

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            contact_form_pairing(ContactState([0.0, 1.0], [0.0, 1.0], 0.0), reeb_field(1))

    @given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3),
           st.lists(finite, min_size=3, max_size=3), finite, finite)
    def test_bilinear_in_tangent(self, p, a, b, ca, cb):
        x = ContactState([0.0] * 3, p, 0.0)
        ta = Tangent(a, [0.0] * 3, ca)
        tb = Tangent(b, [1.0] * 3, cb)
        tsum = Tangent(np.add(a, b), [1.0] * 3, ca + cb)
        lhs = contact_form_pairing(x, tsum)
        rhs = contact_form_pairing(x, ta) + contact_form_pairing(x, tb)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)

    @given(st.lists(finite, min_size=2, max_size=2))
    def test_reeb_independent_of_momentum(self, p):
        assert contact_form_pairing(ContactState([0.0, 0.0], p, 3.0), reeb_field(2)) == 1.0


class TestReeb:
    def test_n1(self):
        np.testing.assert_array_equal(reeb_field(1).as_array(), [0.0, 0.0, 1.0])

    def test_n3(self):
        r = reeb_field(3)
        np.testing.assert_array_equal(r.dq, np.zeros(3))
        np.testing.assert_array_equal(r.dp, np.zeros(3))
        assert r.ds == 1.0

    def test_n0(self):
        with pytest.raises(ValueError):
            reeb_field(0)


class TestFiniteDifferences:
    def test_square(self):
        g = finite_difference_partials(lambda x: x[0] ** 2, [3.0], 1e-5)
        assert abs(g[0] - 6.0) <= 1e-9

    def test_constant(self):
        np.testing.assert_array_equal(finite_difference_partials(lambda x: 4.0, [1.0, 2.0]), [0, 0])

    def test_bilinear(self):
        g = finite_difference_partials(lambda x: x[1] * x[0], [2.0, 3.0, 7.0])
        np.testing.assert_allclose(g, [3.0, 2.0, 0.0], atol=1e-9)

    def test_default_step(self):
        x = np.array([0.0, 1e3])
        np.testing.assert_allclose(default_fd_step(x), np.cbrt(np.finfo(float).eps) * np.array([1.0, 1e3]))

    def test_non_finite_reports_coordinate(self):
        f = lambda x: math.sqrt(x[1]) if x[1] >= 0 else math.nan
        with pytest.raises(NonFiniteError) as info:
            finite_difference_partials(f, [1.0, 0.0])
        assert info.value.index == 1


class TestModels:
    @pytest.mark.parametrize("name", sorted(M.bundled_continuous_hamiltonians()))
    def test_partials_match_fd(self, name, rng):
        H = M.bundled_continuous_hamiltonians()[name]
        n = H.n
        for _ in range(100):
            z = rng.uniform(-2, 2, 2 * n + 1)
            fd = finite_difference_partials(lambda y: H.H(y[:n], y[n:2 * n], y[2 * n]), z)
            Hq, Hp, Hs = H.partials(z[:n], z[n:2 * n], z[2 * n])
            an = np.concatenate([Hq, Hp, [Hs]])
            assert np.all(np.abs(fd - an) <= 1e-5 * np.maximum(1.0, np.abs(an)))

    def test_fd_fallback(self):
        H = ContinuousHamiltonianModel(lambda q, p, s: q[0] * p[0] + s ** 2, 1)
        Hq, Hp, Hs = H.partials([2.0], [3.0], 0.5)
        np.testing.assert_allclose([Hq[0], Hp[0], Hs], [3.0, 2.0, 1.0], rtol=1e-8)

    def test_reeb_factor_check(self):
        Ld = DiscreteLagrangianModel(lambda q0, q1, s0: -s0, 1)
        with pytest.raises(RegularityViolated):
            Ld.check_reeb_factor([0.0], [1.0], 0.3)

    def test_discrete_lagrangian_fd_partials(self):
        Ld = DiscreteLagrangianModel(lambda q0, q1, s0: float(q0[0] * q1[0] + s0 * q1[0]), 1)
        d1, d2, d3 = Ld.partials([2.0], [3.0], 0.5)
        np.testing.assert_allclose([d1[0], d2[0], d3], [3.0, 2.5, 3.0], rtol=1e-8)
