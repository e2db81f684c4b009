import os

import numpy as np
import pytest

import layersplit as ls
from layersplit.errors import ConfigError, DimensionMismatch, DomainError, EmptyRegion
from layersplit.threads import ENV_VAR


def _pair(top, bottom, valid=None):
    top = np.asarray(top, float)
    if valid is None:
        valid = np.ones(top.shape, bool)
    return ls.LayerPair(top, np.asarray(bottom, float), valid)


class TestWeightPair:
    def test_bounds_enforced(self):
        with pytest.raises(DomainError):
            ls.WeightPair(1.2, 0.5)
        with pytest.raises(DomainError):
            ls.WeightPair(0.5, -0.01)

    def test_identity(self):
        assert ls.IDENTITY_WEIGHTS.w1 == 1.0
        assert ls.IDENTITY_WEIGHTS.w2 == 1.0


class TestGridSize:
    def test_standard_step(self):
        assert ls.grid_size(0.01) == 101
        assert ls.grid_size(0.1) == 11
        assert ls.grid_size(0.5) == 3

    def test_rejects_bad_step(self):
        for bad in (0.0, -0.1, 0.6):
            with pytest.raises(ConfigError):
                ls.grid_size(bad)


class TestApplyWeights:
    def test_scales_each_layer(self):
        p = _pair([[0.5, 1.0]], [[0.8, 0.4]])
        out = ls.apply_weights(p, ls.WeightPair(0.5, 0.25))
        assert np.allclose(np.asarray(out.top), [[0.25, 0.5]])
        assert np.allclose(np.asarray(out.bottom), [[0.2, 0.1]])

    def test_identity_is_noop(self):
        p = _pair([[0.3]], [[0.7]])
        out = ls.apply_weights(p, ls.IDENTITY_WEIGHTS)
        assert np.array_equal(np.asarray(out.top), np.asarray(p.top))


class TestErrorSurface:
    def test_grid_shape_and_readonly(self):
        p = _pair([[0.5]], [[0.5]])
        s = ls.error_surface(p, np.array([[0.65625]]), grid_step=0.1)
        assert s.values.shape == (11, 11)
        with pytest.raises(ValueError):
            s.values[0, 0] = 0.0

    def test_cell_value_matches_direct_eval(self):
        rng = np.random.default_rng(2)
        p = _pair(rng.random((6, 6)), rng.random((6, 6)))
        obs = rng.random((6, 6))
        s = ls.error_surface(p, obs, grid_step=0.25)
        w = s.weight_at(2, 3)
        scaled = ls.apply_weights(p, w)
        assert s.values[2, 3] == pytest.approx(ls.objective(scaled, obs), rel=1e-12)

    def test_planted_weights_recovered(self):
        rng = np.random.default_rng(8)
        top = 0.1 + 0.6 * rng.random((12, 12))
        bottom = 0.1 + 0.7 * rng.random((12, 12))
        truth = _pair(0.7 * top, 0.9 * bottom)
        obs = ls.compose_field(truth)
        inflated = _pair(top, bottom)
        s = ls.error_surface(inflated, obs, grid_step=0.01)
        w = ls.best_weights(s)
        assert w.w1 == pytest.approx(0.70, abs=0.0100001)
        assert w.w2 == pytest.approx(0.90, abs=0.0100001)

    def test_shape_mismatch(self):
        p = _pair([[0.5]], [[0.5]])
        with pytest.raises(DimensionMismatch):
            ls.error_surface(p, np.zeros((2, 2)), grid_step=0.5)

    def test_empty_validity(self):
        p = _pair([[0.5]], [[0.5]], np.zeros((1, 1), bool))
        with pytest.raises(EmptyRegion):
            ls.error_surface(p, np.array([[0.5]]), grid_step=0.5)

    def test_worker_count_does_not_change_values(self):
        rng = np.random.default_rng(4)
        p = _pair(rng.random((10, 10)), rng.random((10, 10)))
        obs = rng.random((10, 10))
        a = ls.error_surface(p, obs, grid_step=0.05, workers=1)
        b = ls.error_surface(p, obs, grid_step=0.05, workers=4)
        assert np.array_equal(a.values, b.values)

    def test_env_cap_respected(self):
        old = os.environ.get(ENV_VAR)
        os.environ[ENV_VAR] = "1"
        try:
            assert ls.effective_workers(8) == 1
        finally:
            if old is None:
                del os.environ[ENV_VAR]
            else:
                os.environ[ENV_VAR] = old


class TestBestWeights:
    def test_tie_breaks_to_smallest_row_major(self):
        vals = np.ones((3, 3))
        vals[1, 2] = 0.0
        vals[2, 1] = 0.0
        s = ls.ErrorSurface(grid_step=0.5, values=vals)
        w = ls.best_weights(s)
        assert (w.w1, w.w2) == (0.5, 1.0)

    def test_weight_at_caps_at_one(self):
        s = ls.ErrorSurface(grid_step=0.5, values=np.ones((3, 3)))
        assert s.weight_at(2, 2) == ls.WeightPair(1.0, 1.0)
