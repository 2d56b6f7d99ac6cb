import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nighthaze.config import SynthConfig
from nighthaze.errors import DimensionError
from nighthaze.illum import decompose
from nighthaze.metrics import psnr, rmse
from nighthaze.synth import (
    apply_poly,
    fill_holes,
    fit_illumination_poly,
    generate,
    read_manifest,
    save_scene,
    scene_distance,
)
from scenes import motorcycle, ramp_disparity


class TestDistance:
    def test_principal_point(self):
        dist = scene_distance(np.ones((4, 4)), normalize=False)
        assert dist[2, 2] == pytest.approx(1.0)
        assert dist.min() == dist[2, 2]

    def test_halved_disparity_doubles_distance(self):
        d = np.ones((4, 4))
        base = scene_distance(d, normalize=False)[2, 2]
        d[2, 2] = 0.5
        assert scene_distance(d, normalize=False)[2, 2] == pytest.approx(2 * base)

    def test_normalized_max(self, rng):
        dist = scene_distance(rng.uniform(0.1, 1, (20, 30)))
        assert dist.max() == 1.0

    def test_degenerate(self):
        with pytest.raises(ValueError, match="degenerate disparity"):
            scene_distance(np.zeros((4, 4)))

    def test_fill_holes(self):
        d = np.array([[0.5, 0.0, 0.0, 0.9]])
        np.testing.assert_array_equal(fill_holes(d), [[0.5, 0.5, 0.9, 0.9]])


def _scene(R, d=None, **kw):
    if d is None:
        d = ramp_disparity(R.shape[:2])
    return generate(R, d, SynthConfig(**kw))


class TestGenerate:
    def test_white_fixed_point(self):
        # a huge focal length flattens the distance map, so L and S are constant
        scene = _scene(np.ones((32, 32, 3)), np.ones((32, 32)), focal_scale=1e6)
        np.testing.assert_allclose(scene.transmission, 0.8)
        expected = scene.illumination[..., None] * np.asarray([1.0, 1.0, 0.3])
        np.testing.assert_allclose(scene.env_light, expected, atol=1e-9)
        np.testing.assert_allclose(scene.hazy, expected, atol=1e-9)

    def test_black_reflectance(self):
        scene = _scene(np.zeros((32, 32, 3)))
        t = scene.transmission[..., None]
        np.testing.assert_allclose(scene.hazy, scene.env_light * (1 - t), atol=1e-12)

    def test_invariants_motorcycle(self):
        R, d = motorcycle()
        cfg = SynthConfig()
        scene = generate(R, d, cfg)
        assert scene.forward_residual() <= 1e-6
        np.testing.assert_allclose(scene.transmission, 0.8 * scene.disparity)
        np.testing.assert_allclose(scene.illumination, 1 - cfg.beta * scene.distance)
        assert scene.illumination.min() >= 1 - cfg.beta - 1e-12
        assert scene.illumination.max() <= 1.0
        assert 0 < scene.transmission.min() and scene.transmission.max() <= 0.8
        np.testing.assert_allclose(scene.illumination[..., None] * scene.sigma_true, scene.env_light, atol=1e-6)
        sigma_gap = np.maximum(scene.eta_map, scene.sigma_true)
        for c in range(3):
            assert rmse(scene.eta_map[..., c], sigma_gap[..., c]) <= 0.05

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=10, deadline=None)
    def test_forward_identity_random(self, seed):
        rng = np.random.default_rng(seed)
        R = rng.random((24, 24, 3))
        d = rng.uniform(0.05, 1, (24, 24))
        assert generate(R, d, SynthConfig(env_patch_radius=4)).forward_residual() <= 1e-6

    def test_deterministic(self, rng):
        R = rng.random((32, 32, 3))
        a, b = _scene(R), _scene(R)
        for name in ("hazy", "env_light", "sigma_true", "illumination"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            generate(np.zeros((8, 8, 3)), np.ones((8, 9)))

    def test_save(self, tmp_path, rng):
        scene = _scene(rng.random((16, 16, 3)))
        manifest = save_scene(scene, tmp_path / "s", SynthConfig())
        entries = read_manifest(manifest)
        assert entries["eta_true"] == "1.0,1.0,0.3"
        assert entries["height"] == "16"
        for name in ("hazy", "reflectance", "disparity", "transmission", "illumination", "sigma", "env_light"):
            assert (tmp_path / "s" / f"{name}.png").exists()
            assert len(entries[f"sha256.{name}"]) == 64


class TestPolyFit:
    def test_identity(self, rng):
        x = rng.random(20000)
        c = fit_illumination_poly(x, x, degree=3)
        np.testing.assert_allclose(c, [0, 1, 0, 0], atol=1e-3)

    def test_square(self, rng):
        x = rng.random(20000)
        c = fit_illumination_poly(x, x**2, degree=2)
        assert c[2] == pytest.approx(1.0, abs=1e-3)

    def test_insufficient_support(self):
        with pytest.raises(ValueError, match="insufficient support"):
            fit_illumination_poly(np.array([0.2, 0.2, 0.8]), np.array([0.1, 0.3, 0.9]), degree=3)

    def test_improves_synthetic_pair(self):
        R, d = motorcycle()
        scene = generate(R, d)
        hazy_L = decompose(scene.hazy).illumination
        coeffs = fit_illumination_poly(hazy_L, scene.illumination)
        assert psnr(apply_poly(hazy_L, coeffs), scene.illumination) > psnr(hazy_L, scene.illumination)


class TestApplyPoly:
    def test_identity(self, rng):
        L = rng.uniform(0.01, 1, (5, 5))
        np.testing.assert_array_equal(apply_poly(L, [0, 1]), L)

    def test_constant(self):
        np.testing.assert_array_equal(apply_poly(np.zeros((3, 3)), [0.5]), 0.5)

    def test_matches_direct_evaluation(self, rng):
        x = rng.random(5000)
        c = fit_illumination_poly(x, x**2, degree=2)
        L = rng.random((20, 20))
        direct = np.clip(sum(ci * L**i for i, ci in enumerate(c)), 1 / 255, 1)
        assert np.abs(apply_poly(L, c) - direct).max() <= 1e-9

    def test_empty(self):
        with pytest.raises(ValueError):
            apply_poly(np.zeros(2), [])
