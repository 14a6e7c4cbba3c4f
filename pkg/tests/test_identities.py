import json

import numpy as np
import pytest

from dynirf.identities import (
    CheckReport,
    check_cauchy_rho,
    check_D_integral,
    check_D_rho_integral,
    check_nested_sum_lemma,
    check_orthogonality,
    check_pieri,
    check_skew_cauchy,
    check_skew_cauchy_general,
    check_stoch_sum,
    check_symmetrization_lemma,
)
from dynirf.params import pq_grid, preset
from dynirf.special import TRIG, FunctionMode, InvalidParameterError

RNG = np.random.default_rng(2024)


@pytest.fixture(scope="module")
def trig():
    return preset("trig-admissible")


@pytest.fixture(scope="module")
def wide():
    return preset("trig-admissible-wide")


def near_p(params, k, rng):
    grid = pq_grid(params)
    p0 = complex(np.mean(np.array(grid.p)))
    return [p0 + complex(0.002 * rng.standard_normal(), 0.0015 * rng.standard_normal()) for _ in range(k)]


def near_q(params, k, rng, off=0.03 + 0.01j):
    grid = pq_grid(params)
    q0 = complex(np.mean(np.array(grid.q)))
    return [q0 + off + complex(0.004 * rng.standard_normal(), 0.004 * rng.standard_normal()) for _ in range(k)]


class TestCheckReport:
    def test_invariant_and_serialization(self):
        r = CheckReport("x", {"a": 1}, 1.0 + 1e-12j, 1.0, tolerance=1e-10)
        assert r.passed and r.status == "passed"
        d = r.to_json_dict()
        assert json.dumps(d)  # serializes losslessly
        assert d["lhs"] == [1.0, 1e-12]

    def test_warning_status(self):
        r = CheckReport("x", {}, 1.0, 1.0, tolerance=1e-7, truncation_info={"tail_estimate": 1e-7})
        assert r.status == "passed-with-warning"

    def test_failed(self):
        r = CheckReport("x", {}, 2.0, 1.0, tolerance=1e-10)
        assert not r.passed and r.status == "failed"


class TestSymmetrization:
    def test_m1_trivial(self):
        r = check_symmetrization_lemma(1, [0.3 + 0.2j], 0.17, TRIG)
        assert r.passed and abs(r.rhs - 1) < 1e-14

    @pytest.mark.parametrize("mode", [TRIG, FunctionMode.elliptic(1.5j)], ids=["trig", "ell"])
    def test_m3_random(self, mode):
        vs = [complex(a, b) for a, b in 0.4 * RNG.standard_normal((3, 2))]
        r = check_symmetrization_lemma(3, vs, 0.21 + 0.08j, mode)
        assert r.passed

    def test_single_term_at_special_points(self):
        # vs = (beta, 2*beta, 3*beta): exactly one permutation contributes.
        import itertools

        from dynirf.special import f_eval

        beta = 0.19 + 0.07j
        vs = [beta, 2 * beta, 3 * beta]
        r = check_symmetrization_lemma(3, vs, beta, TRIG)
        assert r.passed
        f = lambda x: f_eval(TRIG, x)
        nonzero = 0
        for perm in itertools.permutations(range(3)):
            term = 1.0 + 0j
            for a in range(3):
                for b in range(a + 1, 3):
                    term *= f(vs[perm[a]] - vs[perm[b]] - beta) / f(vs[perm[a]] - vs[perm[b]])
            for k in range(1, 4):
                term *= f(vs[perm[k - 1]] + (3 - 2 * k + 1) * beta) / f(vs[perm[k - 1]])
            if abs(term) > 1e-12:
                nonzero += 1
        assert nonzero == 1


class TestSeriesIdentities:
    def test_skew_cauchy_seed(self, trig):
        rng = np.random.default_rng(5)
        u, v = near_p(trig, 1, rng)[0], near_q(trig, 1, rng)[0]
        r = check_skew_cauchy((0,), (), u, v, trig)
        assert r.passed, r.residual

    def test_skew_cauchy_small(self, trig):
        rng = np.random.default_rng(6)
        u, v = near_p(trig, 1, rng)[0], near_q(trig, 1, rng)[0]
        r = check_skew_cauchy((2, 1), (1,), u, v, trig)
        assert r.passed and r.residual < 1e-7

    def test_skew_cauchy_general_k2l2(self, trig):
        rng = np.random.default_rng(7)
        r = check_skew_cauchy_general((2, 1), (), near_p(trig, 2, rng), near_q(trig, 2, rng), trig)
        assert r.passed

    def test_pieri_variants(self, trig):
        rng = np.random.default_rng(8)
        r1 = check_pieri("pieri2", trig, nu=(), u=near_p(trig, 1, rng)[0], vs=near_q(trig, 1, rng))
        r2 = check_pieri("pieri", trig, nu=(2, 1), us=near_p(trig, 2, rng), v=near_q(trig, 1, rng)[0])
        r3 = check_pieri("cauchy", trig, us=near_p(trig, 1, rng), vs=near_q(trig, 1, rng))
        assert r1.passed and r2.passed and r3.passed

    def test_cauchy_rhs_structure_at_p0(self, trig):
        # at u = p_0 the closed factor reduces to the displayed f-call
        from dynirf.identities import _b0k_norm_factor

        grid = pq_grid(trig)
        lam, k = 0.31 + 0.2j, 2
        u = grid.p[0]
        z0, L0 = trig.columns[0]
        direct = trig.f(2 * trig.eta) * trig.f(lam - z0 + u + trig.eta * (-L0 + 2 * k - 1)) / trig.f(
            z0 - u + (L0 + 1) * trig.eta
        )
        assert abs(_b0k_norm_factor(k, lam, u, trig) - direct) < 1e-14 * abs(direct)

    def test_cauchy_rho(self, trig):
        rng = np.random.default_rng(9)
        r1 = check_cauchy_rho(1, near_p(trig, 1, rng), trig)
        us = near_p(trig, 1, rng) * 2
        r2 = check_cauchy_rho(2, us, trig)  # coincident arguments stay defined
        assert r1.passed and r2.passed

    def test_bad_shapes(self, trig):
        with pytest.raises(InvalidParameterError):
            check_skew_cauchy((1,), (1,), 0.1, 0.2, trig)
        with pytest.raises(InvalidParameterError):
            check_pieri("nope", trig)


class TestQuadratureIdentities:
    def test_orthogonality_diagonal_m1(self, trig):
        r = check_orthogonality((1,), (1,), trig)
        assert r.passed and r.residual < 1e-6

    def test_orthogonality_offdiagonal(self, trig):
        r = check_orthogonality((2,), (1,), trig)
        assert r.passed
        assert abs(r.lhs) < 1e-6 * max(1.0, abs(complex(*r.parameters["c_mu"])))

    def test_orthogonality_m2_diagonal(self, wide):
        r = check_orthogonality((2, 1), (2, 1), wide)
        assert r.passed, r.residual

    def test_D_integral(self, trig):
        rng = np.random.default_rng(11)
        r = check_D_integral((1,), 1, near_q(trig, 1, rng), trig)
        assert r.passed, r.residual

    def test_D_rho_integral_and_vanishing(self, trig):
        r1 = check_D_rho_integral((1,), trig)
        r2 = check_D_rho_integral((2, 0), trig)  # nu_N = 0: integral vanishes
        assert r1.passed and r2.passed
        assert abs(r2.lhs) < 1e-10 and r2.rhs == 0

    def test_stoch_sum_report(self, trig):
        rng = np.random.default_rng(12)
        r = check_stoch_sum((2,), near_p(trig, 1, rng), trig)
        assert r.passed and r.truncation_info["converged"]


class TestNestedSum:
    def test_n1(self):
        Y = RNG.standard_normal((1, 8))
        r = check_nested_sum_lemma(1, (5,), Y)
        assert r.passed and abs(r.lhs - sum(Y[0][:5])) < 1e-12

    def test_empty_sum_vanishes(self):
        Y = RNG.standard_normal((3, 8))
        r = check_nested_sum_lemma(3, (1, 1, 5), Y)  # T_2 < 2
        assert r.rhs == 0 and r.passed

    def test_n3_random(self):
        Y = RNG.standard_normal((3, 8))
        r = check_nested_sum_lemma(3, (2, 3, 5), Y)
        assert r.passed and r.residual < 1e-12
