import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from dynirf.special import (
    TRIG,
    Circle,
    ConvergenceError,
    FunctionMode,
    InvalidParameterError,
    contour_integral,
    erfc_real,
    f_deriv0,
    f_eval,
    q_pochhammer,
    theta,
    theta_deriv,
)

RNG = np.random.default_rng(20260810)


class TestTheta:
    def test_zero_at_origin(self):
        assert abs(theta(0.0, 2j)) < 1e-13

    def test_period_one_antisymmetry(self):
        z, tau = 0.3 + 0.1j, 1.5j
        assert abs(theta(z + 1, tau) + theta(z, tau)) < 1e-12

    @pytest.mark.parametrize("tau", [1.5j, 2j, 0.3 + 1.1j])
    def test_periodicity_relations_random(self, tau):
        # theta(z+1) = -theta(z) = theta(-z) and the tau-quasiperiod, 1e-10
        # relative over 100 points in the fundamental parallelogram.
        zs = RNG.random(100) + tau * RNG.random(100)
        th = theta(zs, tau)
        scale = np.abs(th)
        assert np.all(np.abs(theta(zs + 1, tau) + th) <= 1e-10 * scale)
        assert np.all(np.abs(theta(-zs, tau) + th) <= 1e-10 * scale)
        quasi = -np.exp(-1j * np.pi * (tau + 2 * zs)) * th
        assert np.all(np.abs(theta(zs + tau, tau) - quasi) <= 1e-10 * np.abs(quasi))

    def test_trig_limit(self):
        # For large Im(tau), theta(z, tau) ~ 2 exp(-pi Im(tau)/4) sin(pi z).
        val = theta(0.25, 10j) / (2 * math.exp(-10 * math.pi / 4))
        assert abs(val - math.sin(math.pi * 0.25)) < 1e-6

    def test_rejects_bad_tau(self):
        with pytest.raises(InvalidParameterError):
            theta(0.1, -2j)

    def test_deriv_matches_finite_difference(self):
        z, tau, h = 0.21 + 0.13j, 1.7j, 1e-6
        fd = (theta(z + h, tau) - theta(z - h, tau)) / (2 * h)
        assert abs(theta_deriv(z, tau) - fd) < 1e-8


class TestFEval:
    def test_trig_values(self):
        assert abs(f_eval(TRIG, 0.5) - 1.0) < 1e-15
        z = 0.2 + 0.3j
        assert abs(f_eval(TRIG, -z) + f_eval(TRIG, z)) < 1e-15

    def test_rational_identity(self):
        assert f_eval(FunctionMode.rational(), 2.5) == 2.5

    def test_elliptic_dispatch(self):
        mode = FunctionMode.elliptic(2j)
        assert abs(f_eval(mode, 0.3) - theta(0.3, 2j)) == 0.0

    def test_fprime0(self):
        assert f_deriv0(TRIG) == math.pi
        assert f_deriv0(FunctionMode.rational()) == 1.0
        mode = FunctionMode.elliptic(1.9j)
        h = 1e-6
        fd = (theta(h, 1.9j) - theta(-h, 1.9j)) / (2 * h)
        assert abs(f_deriv0(mode) - fd) < 1e-8

    def test_mode_validation(self):
        with pytest.raises(InvalidParameterError):
            FunctionMode.elliptic(-1j)
        with pytest.raises(InvalidParameterError):
            FunctionMode("elliptic")


class TestQPochhammer:
    def test_empty_product(self):
        assert q_pochhammer(0.3 + 0.4j, 0.9, 0) == 1

    def test_vanishing_first_factor(self):
        assert q_pochhammer(1.0, 0.37, 3) == 0

    def test_direct_product(self):
        assert abs(q_pochhammer(0.5, 0.5, 2) - 0.375) < 1e-15

    @given(
        st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
        st.complex_numbers(max_magnitude=0.9, allow_nan=False, allow_infinity=False),
        st.integers(min_value=0, max_value=12),
    )
    @settings(max_examples=60, deadline=None)
    def test_recurrence(self, x, q, n):
        lhs = q_pochhammer(x, q, n + 1)
        rhs = q_pochhammer(x, q, n) * (1 - q**n * x)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


class TestErfc:
    def test_at_zero(self):
        assert erfc_real(0.0) == 1.0

    def test_reflection(self):
        x = 0.7
        assert abs(erfc_real(-x) - (2 - erfc_real(x))) < 1e-14

    def test_known_value(self):
        assert abs(erfc_real(1.0) - 0.15729920705028513) < 1e-13

    @pytest.mark.parametrize("x", [-6.0, -1.3, -0.2, 0.1, 0.5, 1.9, 2.0, 2.1, 3.7, 8.0, 15.0])
    def test_against_scipy(self, x):
        ref = scipy.special.erfc(x)
        assert abs(erfc_real(x) - ref) <= 1e-12 * max(1.0, abs(ref))


class TestContourIntegral:
    def test_simple_pole(self):
        val = contour_integral(lambda v: 1.0 / v[0], [Circle(0, 1.0)])
        assert abs(val - 1.0) < 1e-12

    def test_no_enclosed_pole(self):
        val = contour_integral(lambda v: 1.0 / (v[0] - 5.0), [Circle(0, 1.0)])
        assert abs(val) < 1e-12

    def test_product_rule_two_variables(self):
        val = contour_integral(
            lambda v: 1.0 / (v[0] * v[1]), [Circle(0, 1.0), Circle(0, 2.0)]
        )
        assert abs(val - 1.0) < 1e-11

    def test_rational_residue_sum(self):
        # (3v^2+1)/((v-0.2)(v+0.3j)) has residues at both enclosed poles.
        def g(v):
            return (3 * v[0] ** 2 + 1) / ((v[0] - 0.2) * (v[0] + 0.3j))

        r1 = (3 * 0.2**2 + 1) / (0.2 + 0.3j)
        r2 = (3 * (-0.3j) ** 2 + 1) / (-0.3j - 0.2)
        val = contour_integral(g, [Circle(0, 1.0)])
        assert abs(val - (r1 + r2)) < 1e-11

    def test_essential_singularity(self):
        # exp(1/v) has residue 1 at 0.
        val = contour_integral(lambda v: np.exp(1.0 / v[0]), [Circle(0, 0.8)])
        assert abs(val - 1.0) < 1e-11

    def test_offcenter_circle(self):
        val = contour_integral(lambda v: 1.0 / (v[0] - 0.5j), [Circle(0.5j, 0.25)])
        assert abs(val - 1.0) < 1e-12

    def test_convergence_error_carries_estimates(self):
        # A pole close to the contour keeps successive estimates moving at
        # this tolerance, so a tiny node cap must trip the failure path.
        def g(v):
            return 1.0 / (v[0] - 1.02)

        with pytest.raises(ConvergenceError) as exc:
            contour_integral(g, [Circle(0, 1.0)], nodes=16, tol=1e-13, node_cap=64)
        assert exc.value.estimates is not None

    def test_node_minimum(self):
        with pytest.raises(InvalidParameterError):
            contour_integral(lambda v: 1.0 / v[0], [Circle(0, 1.0)], nodes=8)
