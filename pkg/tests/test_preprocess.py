import numpy as np
import pytest

from seedprior import (
    DiffusionParams,
    Grid,
    ValidationError,
    anisotropic_diffusion,
    channel_normalize,
    histogram_equalize,
)


class TestDiffusionParams:
    def test_defaults_valid(self):
        p = DiffusionParams()
        assert p.kappa == 0.05 and p.step == 0.15 and p.iterations == 10

    @pytest.mark.parametrize(
        "kwargs", [dict(kappa=0.0), dict(kappa=-1), dict(step=0.0), dict(step=0.6), dict(iterations=-1)]
    )
    def test_rejects_bad_params(self, kwargs):
        with pytest.raises(ValidationError):
            DiffusionParams(**kwargs)


class TestAnisotropicDiffusion:
    def test_constant_is_fixed_point(self):
        g = Grid.from_array(np.full((5, 5), 0.5))
        out = anisotropic_diffusion(g, DiffusionParams(iterations=7))
        assert np.array_equal(out.data, g.data)

    def test_zero_iterations_identity(self):
        rng = np.random.default_rng(0)
        g = Grid.from_array(rng.random((6, 6)))
        out = anisotropic_diffusion(g, DiffusionParams(iterations=0))
        assert np.array_equal(out.data, g.data)

    def test_single_step_on_edge_row(self):
        # hand-applied update with conductance ~= 1 (huge kappa):
        # [0,0,1,1] -> [0, 0.25, 0.75, 1]
        g = Grid.from_array(np.array([[0.0, 0.0, 1.0, 1.0]]))
        out = anisotropic_diffusion(g, DiffusionParams(kappa=1e6, step=0.25, iterations=1))
        np.testing.assert_allclose(out.data.ravel(), [0.0, 0.25, 0.75, 1.0], atol=1e-9)

    def test_stability_bound_2d_vs_3d(self):
        p = DiffusionParams(step=0.25, iterations=1)
        anisotropic_diffusion(Grid.from_array(np.zeros((4, 4))), p)  # 1/4 allowed in 2D
        with pytest.raises(ValidationError):
            anisotropic_diffusion(Grid.from_array(np.zeros((4, 4, 4))), p)  # > 1/6

    def test_maximum_principle_and_mass_conservation(self):
        rng = np.random.default_rng(1)
        for shape in [(2, 12, 11), (1, 6, 7, 8)]:
            g = Grid(rng.random(shape))
            out = anisotropic_diffusion(g, DiffusionParams(kappa=0.2, step=0.1, iterations=15))
            for c in range(g.channels):
                vin, vout = g.data[c], out.data[c]
                assert vout.min() >= vin.min() - 1e-12
                assert vout.max() <= vin.max() + 1e-12
                assert abs(vout.mean() - vin.mean()) < 1e-6

    def test_channels_diffuse_independently(self):
        rng = np.random.default_rng(2)
        a = rng.random((7, 7))
        b = rng.random((7, 7))
        p = DiffusionParams(iterations=4)
        joint = anisotropic_diffusion(Grid(np.stack([a, b])), p)
        alone = anisotropic_diffusion(Grid.from_array(a), p)
        assert np.array_equal(joint.data[0], alone.data[0])


class TestHistogramEqualize:
    def test_constant_stays_constant(self):
        g = Grid.from_array(np.full((4, 4), 0.3))
        out = histogram_equalize(g)
        assert len(np.unique(out.data)) == 1

    def test_two_level_cdf(self):
        # 50/50 split at {0.2, 0.4}: CDF of the two occupied bins is {0.5, 1.0}
        g = Grid.from_array(np.array([[0.2, 0.4], [0.4, 0.2]]))
        out = histogram_equalize(g)
        assert sorted(np.unique(out.data).tolist()) == [0.5, 1.0]

    def test_uniform_nearly_unchanged(self):
        v = (np.arange(256, dtype=np.float64) + 0.5) / 256.0
        g = Grid.from_array(v.reshape(16, 16))
        out = histogram_equalize(g)
        assert np.abs(out.data - g.data).max() <= 1.0 / 256.0

    def test_monotone_mapping(self):
        rng = np.random.default_rng(3)
        v = rng.random((1, 10, 10))
        out = histogram_equalize(Grid(v)).data
        order = np.argsort(v.ravel())
        mapped = out.ravel()[order]
        assert (np.diff(mapped) >= 0).all()

    def test_output_in_unit_interval(self):
        rng = np.random.default_rng(4)
        out = histogram_equalize(Grid(rng.random((3, 8, 8)))).data
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestChannelNormalize:
    def test_identity_when_targets_match(self):
        rng = np.random.default_rng(5)
        v = rng.random((2, 6, 6)) * 0.5 + 0.25
        g = Grid(v)
        means = [v[c].mean() for c in range(2)]
        stds = [v[c].std() for c in range(2)]
        out = channel_normalize(g, means, stds)
        np.testing.assert_allclose(out.data, g.data, atol=1e-12)

    def test_zero_variance_channel(self):
        g = Grid.from_array(np.full((3, 3), 0.9))
        out = channel_normalize(g, [0.5], [0.2])
        np.testing.assert_allclose(out.data, 0.5, atol=1e-12)

    def test_direct_mapping(self):
        # mean 0.2 / std 0.1 -> target 0.5 / 0.2 sends 0.3 to 0.7
        v = np.array([[0.1, 0.3], [0.3, 0.1]])
        g = Grid.from_array(v)
        assert abs(v.mean() - 0.2) < 1e-12 and abs(v.std() - 0.1) < 1e-12
        out = channel_normalize(g, [0.5], [0.2])
        np.testing.assert_allclose(out.data[0, 0, 1], 0.7, atol=1e-12)

    def test_clamped(self):
        g = Grid.from_array(np.array([[0.0, 1.0]]))
        out = channel_normalize(g, [0.5], [2.0])
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_channel_count_mismatch(self):
        g = Grid.from_array(np.zeros((2, 2)))
        with pytest.raises(ValidationError):
            channel_normalize(g, [0.5, 0.5], [0.1, 0.1])
