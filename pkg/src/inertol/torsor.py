"""Small-displacement torsors of planar surfaces.

A plane that may translate along its normal (z) and tilt about the two
in-plane axes is described by three components (tz, rx, ry) together with the
point at which they are expressed.  The normal displacement of an arbitrary
in-plane point p is

    w(p) = tz + rx * (p_y - at_y) - ry * (p_x - at_x)

with the right-handed convention: a positive rx lifts the +y edge, a positive
ry lowers the +x edge.  Transport moves the expression point without changing
the displacement field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Torsor",
    "SurfaceGeometry",
    "displacement",
    "transport",
    "corner_points",
    "corner_influence_rows",
    "corner_deviations",
]


@dataclass(frozen=True)
class Torsor:
    """Normal translation (mm) and small rotations (rad) of a plane at a point."""

    tz: float
    rx: float
    ry: float
    at: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class SurfaceGeometry:
    """Rectangular plane extents (mm) and the x-offset of its frame in the mechanism."""

    lx: float
    ly: float
    offset_x: float = 0.0

    def __post_init__(self) -> None:
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("plane extents must be > 0")


def displacement(t: Torsor, point: tuple[float, float]) -> float:
    """Normal displacement of an in-plane point under the torsor."""
    return t.tz + t.rx * (point[1] - t.at[1]) - t.ry * (point[0] - t.at[0])


def transport(t: Torsor, to: tuple[float, float]) -> Torsor:
    """Express the same plane motion at another point.

    Rotations are unchanged; the translation becomes the displacement of the
    new expression point, so the field w(p) is identical before and after.
    Transport is invertible and composable.
    """
    return Torsor(displacement(t, to), t.rx, t.ry, (float(to[0]), float(to[1])))


def corner_points(geom: SurfaceGeometry) -> np.ndarray:
    """The four plane corners, ordered (--, +-, -+, ++) in (x, y) signs."""
    a = geom.lx / 2.0
    b = geom.ly / 2.0
    return np.array([[-a, -b], [a, -b], [-a, b], [a, b]])


def corner_influence_rows(geom: SurfaceGeometry) -> np.ndarray:
    """Rows mapping (tz, rx, ry) to the corner displacements: (1, c_y, -c_x)."""
    corners = corner_points(geom)
    rows = np.empty((4, 3))
    rows[:, 0] = 1.0
    rows[:, 1] = corners[:, 1]
    rows[:, 2] = -corners[:, 0]
    return rows


def corner_deviations(t: Torsor, geom: SurfaceGeometry) -> np.ndarray:
    """Normal deviations at the four corners for a torsor expressed at the centre.

    Corner order matches :func:`corner_points`.
    """
    if t.at != (0.0, 0.0):
        raise ValueError("torsor must be expressed at the surface centre")
    return corner_influence_rows(geom) @ np.array([t.tz, t.rx, t.ry])
