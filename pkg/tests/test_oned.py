import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crithardy import (AngularEigenProblem, DomainRangeError,
                       angular_eigenvalue, angular_identity_residual,
                       arc_poincare_constant, extrapolate_angular_zero_limit,
                       hardy_1d_quotient, invert_angular_eigenvalue,
                       radial_reduction_constant, sin_power_quotient,
                       solve_angular)
from crithardy.oned import sin_integral
from conftest import smooth_bump, smooth_bump_d


class TestHardy1D:
    def test_tent_closed_form(self):
        # mass = 1 + 2/3 + int_3^4 (4-t)^2/t^2 = 4 + 8 log(3/4); oracle: sympy
        t = np.array([0.0, 1.0, 3.0, 4.0])
        v = np.array([0.0, 1.0, 1.0, 0.0])
        assert hardy_1d_quotient(t, v, 2) == pytest.approx(
            1.1774794662274717, abs=1e-8)

    def test_two_quadratures_agree(self):
        t = np.linspace(0.0, 1.0, 800)
        v = t**0.9 * (1 - t)
        v[-1] = 0.0
        q_gauss = hardy_1d_quotient(t, v, 2)
        # independent composite-Simpson oracle on the same piecewise-linear
        # model, sub-paneled so its own error is below the comparison level
        slopes = np.diff(v) / np.diff(t)
        mass = 0.0
        for i in range(t.size - 1):
            sub = np.linspace(t[i], t[i + 1], 17)
            vv = v[i] + slopes[i] * (sub - t[i])
            f = np.where(sub > 0, (vv / np.where(sub > 0, sub, 1.0)) ** 2,
                         slopes[i] ** 2)
            h = sub[1] - sub[0]
            mass += h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum()
                             + 2 * f[2:-1:2].sum())
        energy = np.sum(slopes**2 * np.diff(t))
        assert q_gauss == pytest.approx(energy / mass, rel=1e-7)
        assert q_gauss >= 0.25

    def test_exponent_family_limit(self):
        t = np.concatenate([[0.0], np.geomspace(1e-180, 1.0, 2500)])
        alpha = 0.5 + 2.0 ** (-8)
        v = t**alpha * (1 - t)
        v[-1] = 0.0
        q = hardy_1d_quotient(t, v, 2)
        assert abs(q - 0.25) < 0.02

    @given(st.integers(2, 6))
    @settings(max_examples=5, deadline=None)
    def test_lower_bound_property(self, p):
        t = np.linspace(0.0, 2.0, 300)
        v = smooth_bump(t, 0.3, 1.7)
        assert hardy_1d_quotient(t, v, p) >= ((p - 1) / p) ** p - 1e-9


class TestAngularEigenvalue:
    @pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 1.4])
    def test_above_quarter(self, a):
        assert angular_eigenvalue(a) > 0.25

    def test_analytic_bracket(self):
        # identity-based lower bound (1 + sin^2 a)/4 and the Dirichlet
        # eigenvalue upper bound (pi/(pi-2a))^2
        for a in (0.1, 0.5, 0.9, 1.3):
            e = angular_eigenvalue(a)
            assert (1 + math.sin(a) ** 2) / 4 <= e <= (math.pi / (math.pi - 2 * a)) ** 2

    def test_monotone_on_grid(self):
        grid = np.linspace(0.05, 1.5, 20)
        vals = [angular_eigenvalue(float(a)) for a in grid]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_zero_limit_extrapolation(self):
        c, info = extrapolate_angular_zero_limit()
        assert c == pytest.approx(0.25, abs=1e-3)

    def test_zero_not_solved_directly(self):
        with pytest.raises(DomainRangeError):
            solve_angular(AngularEigenProblem(a=0.0))

    def test_eigenfunction_positive(self):
        res = solve_angular(AngularEigenProblem(a=0.7))
        assert np.all(res.phi[1:-1] > 0)

    def test_richardson_consistency(self):
        res = solve_angular(AngularEigenProblem(a=0.9, grid_size=512))
        assert res.value == pytest.approx(angular_eigenvalue(0.9), rel=1e-6)

    def test_inversion(self):
        target = angular_eigenvalue(0.9, 1024) * 1.07
        a_r = invert_angular_eigenvalue(target, 0.9)
        assert angular_eigenvalue(a_r, 1024) == pytest.approx(target, abs=1e-9)
        assert a_r > 0.9


class TestIdentity:
    def test_sin_squared(self):
        r = angular_identity_residual(lambda x: np.sin(x) ** 2,
                                      lambda x: 2 * np.sin(x) * np.cos(x))
        assert abs(r) < 1e-8

    def test_bump(self):
        r = angular_identity_residual(lambda x: smooth_bump(x, 0.5, 2.5),
                                      lambda x: smooth_bump_d(x, 0.5, 2.5),
                                      support=(0.5, 2.5))
        assert abs(r) < 1e-8

    def test_quotient_consequence(self):
        # LHS >= int u^2/4 >= 0 forces the angular quotient above 1/4
        for lo, hi in ((0.3, 1.1), (0.9, 2.9), (1.4, 2.2)):
            u = lambda x: smooth_bump(x, lo, hi)
            du = lambda x: smooth_bump_d(x, lo, hi)
            grid = np.linspace(lo, hi, 4001)
            energy = np.trapezoid(du(grid) ** 2, grid)
            mass = np.trapezoid(u(grid) ** 2 / np.sin(grid) ** 2, grid)
            assert energy / mass >= 0.25


class TestSinPower:
    def test_alpha_one(self):
        q = sin_power_quotient(1.0)
        assert q == pytest.approx(0.5, abs=1e-10)
        gamma_form = 1.0 - sin_integral(2.0) / sin_integral(0.0)
        assert q == pytest.approx(gamma_form, abs=1e-10)

    def test_alpha_small(self):
        q = sin_power_quotient(0.51)
        assert 0.25 < q <= 0.51**2

    def test_decreasing_to_quarter(self):
        vals = [sin_power_quotient(0.5 + 2.0 ** (-k)) for k in range(1, 9)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(0.25 + 2.0 ** (-9), abs=2e-3)

    def test_at_most_alpha_squared(self):
        for alpha in (0.55, 0.7, 1.3, 2.0):
            assert sin_power_quotient(alpha) <= alpha**2

    def test_rejects_nonintegrable(self):
        with pytest.raises(DomainRangeError):
            sin_power_quotient(0.5)


class TestArcPoincare:
    def test_pi_arc(self):
        assert arc_poincare_constant(math.pi, 2).eigenvalue == pytest.approx(1.0)

    def test_half_pi_arc(self):
        assert arc_poincare_constant(math.pi / 2, 2).eigenvalue == pytest.approx(4.0)

    @pytest.mark.parametrize("p", [2, 3])
    def test_scaling(self, p):
        for L in (2.0, 1.0):
            lam = arc_poincare_constant(L, p).eigenvalue
            lam_half = arc_poincare_constant(L / 2, p).eigenvalue
            assert lam_half == pytest.approx(2**p * lam, rel=1e-12)


class TestRadialReduction:
    @pytest.mark.parametrize("N,target", [(2, 0.25), (3, 8 / 27),
                                          (10, 0.9**10)])
    def test_limits(self, N, target):
        assert radial_reduction_constant(N) == pytest.approx(target, abs=0.02)
