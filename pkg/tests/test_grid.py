import numpy as np
import pytest

from seedprior import Grid, ValidationError, neighbors, normalize_intensity
from seedprior.grid import neighbor_offsets


class TestGrid:
    def test_shape_and_channels(self):
        g = Grid(np.zeros((3, 5, 7)))
        assert g.channels == 3
        assert g.shape == (5, 7)
        assert g.rank == 2
        assert g.n_pixels == 35

    def test_from_array_2d_and_3d(self):
        assert Grid.from_array(np.zeros((4, 4))).rank == 2
        assert Grid.from_array(np.zeros((2, 4, 4))).rank == 3

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            Grid(np.full((1, 2, 2), np.nan))

    def test_rejects_bad_rank(self):
        with pytest.raises(ValidationError):
            Grid(np.zeros((4, 4)))  # no channel axis
        with pytest.raises(ValidationError):
            Grid.from_array(np.zeros(5))

    def test_immutable(self):
        g = Grid.from_array(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            g.data[0, 0, 0] = 1.0


class TestNeighbors:
    def test_corner_faces(self):
        g = Grid.from_array(np.zeros((4, 4)))
        assert neighbors((0, 0), g, "faces") == [(0, 1), (1, 0)]

    def test_interior_faces(self):
        g = Grid.from_array(np.zeros((4, 4)))
        got = neighbors((1, 1), g, "faces")
        assert got == [(0, 1), (1, 0), (1, 2), (2, 1)]

    def test_interior_full_3d(self):
        g = Grid.from_array(np.zeros((3, 3, 3)))
        got = neighbors((1, 1, 1), g, "full")
        assert len(got) == 26
        assert (1, 1, 1) not in got

    def test_interior_faces_3d(self):
        g = Grid.from_array(np.zeros((3, 3, 3)))
        assert len(neighbors((1, 1, 1), g, "faces")) == 6

    def test_offsets_lexicographic(self):
        for rank in (2, 3):
            for conn in ("faces", "full"):
                offs = [tuple(o) for o in neighbor_offsets(rank, conn)]
                assert offs == sorted(offs)
                assert all(any(o) for o in offs)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for shape in [(5, 4), (3, 4, 5)]:
            g = Grid.from_array(np.zeros(shape))
            for conn in ("faces", "full"):
                for _ in range(20):
                    p = tuple(int(rng.integers(0, e)) for e in shape)
                    for q in neighbors(p, g, conn):
                        assert p in neighbors(q, g, conn)

    def test_count_bounds(self):
        caps = {(2, "faces"): 4, (2, "full"): 8, (3, "faces"): 6, (3, "full"): 26}
        rng = np.random.default_rng(2)
        for shape in [(5, 6), (4, 5, 6)]:
            g = Grid.from_array(np.zeros(shape))
            interior = tuple(e // 2 for e in shape)
            for conn in ("faces", "full"):
                cap = caps[(len(shape), conn)]
                assert len(neighbors(interior, g, conn)) == cap
                for _ in range(10):
                    p = tuple(int(rng.integers(0, e)) for e in shape)
                    assert len(neighbors(p, g, conn)) <= cap

    def test_unknown_connectivity(self):
        g = Grid.from_array(np.zeros((2, 2)))
        with pytest.raises(ValidationError):
            neighbors((0, 0), g, "diagonal")


class TestNormalizeIntensity:
    def test_endpoints(self):
        g = Grid.from_array(np.array([[0.0, 255.0]]))
        assert normalize_intensity(g).data.ravel().tolist() == [0.0, 1.0]

    def test_constant_maps_to_zero(self):
        g = Grid.from_array(np.full((3, 3), 7.0))
        assert (normalize_intensity(g).data == 0.0).all()

    def test_three_levels(self):
        # (v - min) / (max - min) on {2, 4, 6}
        g = Grid.from_array(np.array([[2.0, 4.0, 6.0]]))
        assert normalize_intensity(g).data.ravel().tolist() == [0.0, 0.5, 1.0]

    def test_idempotent_on_normalized(self):
        rng = np.random.default_rng(3)
        g = normalize_intensity(Grid.from_array(rng.random((6, 6))))
        again = normalize_intensity(g)
        assert np.array_equal(again.data, g.data)

    def test_joint_over_channels(self):
        data = np.stack([np.array([[0.0, 4.0]]), np.array([[1.0, 2.0]])])
        out = normalize_intensity(Grid(data))
        assert out.data[0].ravel().tolist() == [0.0, 1.0]
        assert out.data[1].ravel().tolist() == [0.25, 0.5]
