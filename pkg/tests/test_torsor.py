"""Torsor transport and corner evaluation tests."""

import numpy as np
import pytest

from inertol.torsor import (
    SurfaceGeometry,
    Torsor,
    corner_deviations,
    corner_points,
    displacement,
    transport,
)


class TestTransport:
    def test_same_point_identity(self):
        t = Torsor(0.01, 2e-4, -1e-4)
        assert transport(t, (0.0, 0.0)) == t

    def test_pure_rotation_lever(self):
        t = Torsor(0.0, 3e-4, 0.0)
        moved = transport(t, (50.0, 40.0))
        assert moved.tz == pytest.approx(3e-4 * 40.0)
        assert (moved.rx, moved.ry) == (t.rx, t.ry)

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            t = Torsor(*rng.normal(0, [1e-2, 1e-4, 1e-4]))
            p = tuple(rng.uniform(-50, 50, 2))
            back = transport(transport(t, p), (0.0, 0.0))
            assert back.tz == pytest.approx(t.tz, abs=1e-14)
            assert back.rx == t.rx and back.ry == t.ry

    def test_field_preserved(self):
        rng = np.random.default_rng(8)
        for _ in range(1000):
            t = Torsor(*rng.normal(0, [1e-2, 1e-4, 1e-4]))
            p = tuple(rng.uniform(-60, 60, 2))
            q = tuple(rng.uniform(-60, 60, 2))
            before = displacement(t, q)
            after = displacement(transport(t, p), q)
            assert after == pytest.approx(before, abs=1e-12)

    def test_composable(self):
        t = Torsor(0.02, -3e-4, 5e-4)
        via = transport(transport(t, (10.0, -5.0)), (30.0, 20.0))
        direct = transport(t, (30.0, 20.0))
        assert via.tz == pytest.approx(direct.tz, abs=1e-15)


class TestCorners:
    geom = SurfaceGeometry(100.0, 80.0)

    def test_corner_order(self):
        pts = corner_points(self.geom)
        assert pts.tolist() == [[-50, -40], [50, -40], [-50, 40], [50, 40]]

    def test_pure_translation(self):
        w = corner_deviations(Torsor(0.01, 0.0, 0.0), self.geom)
        assert w == pytest.approx([0.01] * 4)

    def test_pure_rotation_pairs(self):
        w = corner_deviations(Torsor(0.0, 2e-4, 0.0), self.geom)
        assert w == pytest.approx([-8e-3, -8e-3, 8e-3, 8e-3])

    def test_combined_maximum(self):
        w = corner_deviations(Torsor(0.01, 2e-4, 1e-4), self.geom)
        assert w == pytest.approx([0.007, -0.003, 0.023, 0.013])
        assert w.max() == pytest.approx(0.023)

    def test_requires_centre_expression(self):
        with pytest.raises(ValueError):
            corner_deviations(Torsor(0.0, 0.0, 0.0, at=(1.0, 0.0)), self.geom)

    def test_geometry_validation(self):
        with pytest.raises(ValueError):
            SurfaceGeometry(0.0, 80.0)
