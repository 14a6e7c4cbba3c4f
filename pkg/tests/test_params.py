import json

import numpy as np
import pytest

from dynirf.params import (
    AdmissibilityDiagnostic,
    ContourFamily,
    IrfParams,
    check_admissible,
    load_config,
    params_from_json_dict,
    params_to_json_dict,
    pq_grid,
    preset,
    six_vertex_row_w,
    to_six_vertex,
)
from dynirf.special import FunctionMode, InvalidParameterError

RNG = np.random.default_rng(7)


def small_params(eta=0.05, lam0=0.3 + 0.2j, cols=None, rows=(0.11, 0.13)):
    if cols is None:
        cols = ((0.3, 1.0), (0.32, 1.1), (0.29, 0.9))
    return IrfParams(FunctionMode.trigonometric(), eta, lam0, cols, rows)


class TestPQGrid:
    def test_spin_one_example(self):
        grid = pq_grid(small_params())
        assert abs(grid.p[0] - 0.3) < 1e-15
        assert abs(grid.q[0] - 0.4) < 1e-15

    def test_zero_spin_degenerate(self):
        p = small_params(cols=((0.3, 0.0),), rows=(0.1,))
        grid = pq_grid(p)
        assert grid.p[0] == grid.q[0] == 0.3 + 0.05

    def test_sum_rule_and_inversion(self):
        eta = 0.04 + 0.02j
        cols = tuple(
            (complex(a, b), complex(c, d))
            for a, b, c, d in RNG.normal(size=(6, 4))
        )
        p = IrfParams(FunctionMode.trigonometric(), eta, 0.1, cols, (0.0,))
        grid = pq_grid(p)
        for j, (z, lam) in enumerate(cols):
            assert abs(grid.p[j] + grid.q[j] - (2 * eta + 2 * z)) < 1e-12
            z_back = (grid.p[j] + grid.q[j]) / 2 - eta
            lam_back = (grid.q[j] - grid.p[j]) / (2 * eta)
            assert abs(z_back - z) < 1e-12 and abs(lam_back - lam) < 1e-12

    def test_partial_sums(self):
        p = small_params()
        assert p.lam_sum(1, 1) == 0
        assert abs(p.lam_sum(0, 3) - (1.0 + 1.1 + 0.9)) < 1e-15
        assert abs(p.lam_sum(1, 3) - (1.1 + 0.9)) < 1e-15


class TestAdmissibility:
    def test_trig_admissible_preset_m3(self):
        fam = check_admissible(preset("trig-admissible"), 3)
        assert isinstance(fam, ContourFamily) and fam.M == 3

    def test_single_contour(self):
        fam = check_admissible(preset("trig-admissible"), 1)
        assert isinstance(fam, ContourFamily) and fam.M == 1

    def test_family_self_audits(self):
        # Returned contours must satisfy all three conditions with margin.
        params = preset("trig-admissible")
        grid = pq_grid(params)
        fam = check_admissible(params, 3)
        inner = fam.gammas[-1]
        assert all(abs(p - inner.center) < inner.radius for p in grid.p)
        for i in range(fam.M - 1):
            a, b = fam.gammas[i], fam.gammas[i + 1]
            assert abs(b.center + 2 * params.eta - a.center) + b.radius < a.radius
        for g in fam.gammas:
            assert all(abs(q - g.center) > g.radius for q in grid.q)

    def test_overlapping_clusters_diagnosed(self):
        # Lambda ~ 0 puts q on top of p: no contour can separate them.
        bad = small_params(cols=((0.3, 1e-9), (0.31, 1e-9)), rows=(0.1,))
        diag = check_admissible(bad, 2)
        assert isinstance(diag, AdmissibilityDiagnostic)
        assert "q inside" in diag.reason
        assert not diag

    def test_m_validation(self):
        with pytest.raises(InvalidParameterError):
            check_admissible(small_params(), 0)


class TestSixVertexMap:
    def test_q_value(self):
        eta = -1j * np.log(4.0) / (4 * np.pi)  # exp(-4*pi*i*eta) = 1/4
        p = small_params(eta=eta)
        sv = to_six_vertex(p)
        assert abs(sv.q - 0.25) < 1e-12

    def test_spin_half_s(self):
        # s = exp(2*pi*i*eta*Lambda) with Lambda = 1 gives s^2 = 1/q; the
        # pair (s, q) is exactly what makes the weight tables match.
        p = preset("dyn6v-positive")
        sv = to_six_vertex(p)
        assert abs(sv.s[0] ** 2 - 1 / sv.q) < 1e-12

    def test_row_roundtrip(self):
        p = small_params()
        sv = to_six_vertex(p)
        for k in range(1, p.n_rows + 1):
            assert abs(six_vertex_row_w(sv.u[k - 1], p.eta) - p.w(k)) < 1e-12

    def test_composition_identity(self):
        p = preset("dyn6v-positive")
        sv = to_six_vertex(p)
        eta = p.eta
        assert abs(np.exp(-4j * np.pi * eta) - sv.q) < 1e-12
        for j in range(1, p.n_cols):
            assert abs(np.exp(2j * np.pi * p.z(j)) - sv.xi[j - 1]) < 1e-12


class TestPresetsAndConfig:
    @pytest.mark.parametrize("name", ["trig-admissible", "dyn6v-positive", "rational-positive"])
    def test_presets_load(self, name):
        p = preset(name)
        assert p.n_cols >= 8 and p.n_rows >= 8

    def test_unknown_preset(self):
        with pytest.raises(InvalidParameterError):
            preset("no-such-thing")

    def test_positive_preset_weights_in_unit_interval(self):
        from dynirf.weights import spin_half_weights

        p = preset("dyn6v-positive")
        for m in (-10, 0, 7):
            lam = p.lambda0 - 2 * p.eta * m
            for wgt in spin_half_weights(lam, p.w(2), p.z(3), p.lam(3), p.eta, p.mode):
                assert abs(wgt.imag) < 1e-9
                assert -1e-9 <= wgt.real <= 1 + 1e-9

    def test_json_roundtrip(self, tmp_path):
        p = preset("trig-admissible")
        cfg = params_to_json_dict(p)
        text = json.dumps(cfg)
        q = params_from_json_dict(json.loads(text))
        assert q == p
        path = tmp_path / "params.json"
        path.write_text(text, encoding="utf-8")
        assert load_config(path) == p

    def test_json_elliptic_tau(self):
        p = IrfParams(FunctionMode.elliptic(1.7j), 0.05, 0.1, ((0.3, 1.0),), (0.1,))
        q = params_from_json_dict(params_to_json_dict(p))
        assert q.mode.tau == 1.7j

    def test_json_rejects_bad_mode(self):
        with pytest.raises(InvalidParameterError):
            params_from_json_dict({"mode": "nope", "eta": [0, 0], "lambda0": [0, 0], "columns": [], "rows": []})


class TestSixVertexInverse:
    def test_full_roundtrip(self):
        from dynirf.params import from_six_vertex

        p = preset("dyn6v-positive")
        back = from_six_vertex(to_six_vertex(p))
        assert abs(back.eta - p.eta) < 1e-12
        assert abs(back.lambda0 - p.lambda0) < 1e-12
        for j in range(1, p.n_cols):
            assert abs(back.z(j) - p.z(j)) < 1e-12
            assert abs(back.lam(j) - p.lam(j)) < 1e-12
        for k in range(1, p.n_rows + 1):
            assert abs(back.w(k) - p.w(k)) < 1e-12
