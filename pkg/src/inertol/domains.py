"""Convex deviation domains in (tz, rx, ry) space.

A tolerance zone on a rectangular plane admits a convex polytope of
small-displacement torsors: the deviation domain.  Domains are kept in dual
representation -- facet half-spaces (unit normal, support offset) and the
vertex hull -- and stack-ups combine by Minkowski sum, evaluated through
support functions: the support of a sum along a direction is the sum of the
supports, and the sum fits inside a target polytope iff the summed support
stays below the target offset on every target facet (exact test for convex
polytopes).

Orientation-only zones are unbounded along tz; they carry a facet
representation only and their support is evaluated by linear programming,
raising :class:`UnboundedDirectionError` along unconstrained directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from inertol.torsor import SurfaceGeometry, corner_influence_rows

__all__ = [
    "DeviationDomain",
    "UnboundedDirectionError",
    "InfeasibleSynthesisError",
    "location_zone_domain",
    "orientation_zone_domain",
    "intersect",
    "support",
    "contains",
    "transported",
    "minkowski_support",
    "minkowski_margins",
    "sum_contained_in",
    "synthesize_worst_case",
    "write_vertices_csv",
]

_FEAS_RTOL = 1.0e-9
_DEDUP_RTOL = 1.0e-9


class UnboundedDirectionError(ValueError):
    """A support evaluation met a direction along which the domain is unbounded."""

    def __init__(self, direction: np.ndarray):
        self.direction = np.asarray(direction, dtype=float)
        super().__init__(
            "domain is unbounded along direction "
            f"({self.direction[0]:g}, {self.direction[1]:g}, {self.direction[2]:g})"
        )


class InfeasibleSynthesisError(ValueError):
    """Worst-case synthesis cannot fit any positive zone scale."""


@dataclass(frozen=True)
class DeviationDomain:
    """Convex polytope of torsor deviations.

    ``normals`` has unit rows; the domain is {x : normals @ x <= offsets}.
    ``vertices`` is None for unbounded domains.
    """

    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray | None

    @property
    def bounded(self) -> bool:
        return self.vertices is not None

    @staticmethod
    def from_facets(normals: np.ndarray, offsets: np.ndarray) -> "DeviationDomain":
        """Build from half-spaces; vertices are enumerated when bounded."""
        normals, offsets = _normalize_facets(normals, offsets)
        normals, offsets = _dedupe_facets(normals, offsets)
        if _has_recession_direction(normals):
            return DeviationDomain(normals, offsets, None)
        verts = _enumerate_vertices(normals, offsets)
        normals, offsets = _prune_slack_facets(normals, offsets, verts)
        return DeviationDomain(normals, offsets, verts)

    @staticmethod
    def from_vertices(vertices: np.ndarray) -> "DeviationDomain":
        """Build from a vertex cloud via its convex hull.

        Axes are rescaled before calling qhull so the strongly anisotropic
        domains of this problem (mm vs rad) stay well conditioned.
        """
        vertices = np.asarray(vertices, dtype=float)
        scale = np.abs(vertices).max(axis=0)
        scale[scale == 0] = 1.0
        hull = ConvexHull(vertices / scale)
        rows = hull.equations[:, :3] / scale
        offs = -hull.equations[:, 3]
        normals, offsets = _normalize_facets(rows, offs)
        normals, offsets = _dedupe_facets(normals, offsets)
        verts = vertices[hull.vertices]
        return DeviationDomain(normals, offsets, verts)


def _normalize_facets(normals: np.ndarray, offsets: np.ndarray):
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    norms = np.linalg.norm(normals, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero facet normal")
    return normals / norms[:, None], offsets / norms


def _dedupe_facets(normals: np.ndarray, offsets: np.ndarray):
    keep: list[int] = []
    for i in range(len(offsets)):
        dup = False
        for j in keep:
            if (
                np.allclose(normals[i], normals[j], rtol=0, atol=_DEDUP_RTOL)
                and abs(offsets[i] - offsets[j])
                <= _DEDUP_RTOL * max(1.0, abs(offsets[j]))
            ):
                dup = True
                break
        if not dup:
            keep.append(i)
    return normals[keep], offsets[keep]


def _has_recession_direction(normals: np.ndarray) -> bool:
    # The recession cone {u : N u <= 0} is nonzero iff some axis-aligned
    # objective can be pushed strictly positive inside the unit box.
    for k in range(3):
        for sign in (1.0, -1.0):
            c = np.zeros(3)
            c[k] = -sign
            res = linprog(
                c,
                A_ub=normals,
                b_ub=np.zeros(len(normals)),
                bounds=[(-1.0, 1.0)] * 3,
                method="highs",
            )
            if res.status != 0:  # pragma: no cover - defensive
                raise RuntimeError(f"recession LP failed: {res.message}")
            if -res.fun > 1.0e-9:
                return True
    return False


def _enumerate_vertices(normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    nf = len(offsets)
    feas_tol = _FEAS_RTOL * max(1.0, float(np.abs(offsets).max()))
    candidates = []
    for idx in combinations(range(nf), 3):
        a = normals[list(idx)]
        if abs(np.linalg.det(a)) < 1.0e-12:
            continue
        x = np.linalg.solve(a, offsets[list(idx)])
        if np.all(normals @ x <= offsets + feas_tol):
            candidates.append(x)
    if not candidates:
        raise ValueError("facet set has no vertices (empty or degenerate domain)")
    pts = np.array(candidates)
    atol = _DEDUP_RTOL * np.maximum(np.abs(pts).max(axis=0), 1.0e-30)
    uniq: list[np.ndarray] = []
    for p in pts:
        if not any(np.all(np.abs(p - q) <= atol) for q in uniq):
            uniq.append(p)
    return np.array(uniq)


def _prune_slack_facets(normals, offsets, vertices):
    best = (vertices @ normals.T).max(axis=0)
    tol = _FEAS_RTOL * np.maximum(1.0, np.abs(offsets))
    tight = best >= offsets - tol
    return normals[tight], offsets[tight]


def location_zone_domain(width: float, geom: SurfaceGeometry) -> DeviationDomain:
    """Domain of a location tolerance zone: every corner within +-width/2.

    Eight facets +-(1, c_y, -c_x) over the four corners; the resulting polytope
    is the octahedron |tz| + (ly/2)|rx| + (lx/2)|ry| <= width/2.
    """
    if width <= 0:
        raise ValueError("zone width must be > 0")
    rows = corner_influence_rows(geom)
    normals = np.vstack([rows, -rows])
    offsets = np.full(8, width / 2.0)
    return DeviationDomain.from_facets(normals, offsets)


def orientation_zone_domain(width: float, geom: SurfaceGeometry) -> DeviationDomain:
    """Domain of an orientation zone: corner spread from rotations within +-width/2.

    Translation is unconstrained, so the domain is an unbounded prism along tz.
    """
    if width <= 0:
        raise ValueError("zone width must be > 0")
    rows = corner_influence_rows(geom).copy()
    rows[:, 0] = 0.0
    normals = np.vstack([rows, -rows])
    offsets = np.full(8, width / 2.0)
    normals, offsets = _normalize_facets(normals, offsets)
    normals, offsets = _dedupe_facets(normals, offsets)
    return DeviationDomain(normals, offsets, None)


def intersect(a: DeviationDomain, b: DeviationDomain) -> DeviationDomain:
    """Intersection of two domains (concatenated half-spaces)."""
    return DeviationDomain.from_facets(
        np.vstack([a.normals, b.normals]), np.concatenate([a.offsets, b.offsets])
    )


def support(domain: DeviationDomain, direction: np.ndarray) -> float:
    """Support function h(u) = max {u . x : x in domain}."""
    u = np.asarray(direction, dtype=float)
    if domain.bounded:
        return float((domain.vertices @ u).max())
    res = linprog(
        -u,
        A_ub=domain.normals,
        b_ub=domain.offsets,
        bounds=[(None, None)] * 3,
        method="highs",
    )
    if res.status == 3:
        raise UnboundedDirectionError(u)
    if res.status != 0:  # pragma: no cover - defensive
        raise RuntimeError(f"support LP failed: {res.message}")
    return float(-res.fun)


def contains(domain: DeviationDomain, points: np.ndarray) -> np.ndarray:
    """Membership test for one point or an (n, 3) array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tol = _FEAS_RTOL * np.maximum(1.0, np.abs(domain.offsets))
    ok = np.all(pts @ domain.normals.T <= domain.offsets + tol, axis=1)
    return ok if np.asarray(points).ndim > 1 else bool(ok[0])


def transported(domain: DeviationDomain, delta: tuple[float, float]) -> DeviationDomain:
    """Re-express the domain at a point shifted by ``delta`` = (dx, dy).

    Applies the torsor transport map tz' = tz + rx dy - ry dx to every element
    of the domain (rotations unchanged).
    """
    dx, dy = float(delta[0]), float(delta[1])
    m_inv = np.array([[1.0, -dy, dx], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    rows = domain.normals @ m_inv
    normals, offsets = _normalize_facets(rows, domain.offsets)
    verts = None
    if domain.vertices is not None:
        m = np.array([[1.0, dy, -dx], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        verts = domain.vertices @ m.T
    return DeviationDomain(normals, offsets, verts)


def minkowski_support(domains: Sequence[DeviationDomain], direction: np.ndarray) -> float:
    """Support of the Minkowski sum: the sum of the summand supports."""
    return sum(support(d, direction) for d in domains)


def minkowski_margins(
    domains: Sequence[DeviationDomain], fr: DeviationDomain
) -> np.ndarray:
    """Per-facet slack h_f - sum_i support_i(n_f) of the sum inside ``fr``."""
    sums = np.array([minkowski_support(domains, n) for n in fr.normals])
    return fr.offsets - sums


def sum_contained_in(domains: Sequence[DeviationDomain], fr: DeviationDomain) -> bool:
    """True iff the Minkowski sum of ``domains`` fits inside ``fr``."""
    margins = minkowski_margins(domains, fr)
    tol = _FEAS_RTOL * np.maximum(1.0, np.abs(fr.offsets))
    return bool(np.all(margins >= -tol))


def component_domain(
    geom: SurfaceGeometry,
    zones: Iterable[str],
    location_width: float,
    orientation_width: float,
) -> DeviationDomain:
    """Deviation domain of one toleranced surface given its zone callouts."""
    zones = set(zones)
    unknown = zones - {"location", "orientation"}
    if unknown:
        raise ValueError(f"unknown zone kinds: {sorted(unknown)}")
    dom: DeviationDomain | None = None
    if "location" in zones:
        dom = location_zone_domain(location_width, geom)
    if "orientation" in zones:
        ori = orientation_zone_domain(orientation_width, geom)
        dom = ori if dom is None else intersect(dom, ori)
    if dom is None:
        raise ValueError("surface carries no tolerance zone")
    return dom


def synthesize_worst_case(
    parts: Sequence[tuple[SurfaceGeometry, Iterable[str]]],
    fr_geom: SurfaceGeometry,
    fr_tolerance: float,
    ratio: float = 2.0,
    rel_tol: float = 1.0e-6,
) -> tuple[float, float]:
    """Largest (t1, t2) = (ratio*t2, t2) whose stack-up fits the FR zone.

    Every part domain is transported to the FR surface frame before the
    Minkowski sum; feasibility is monotone in the common scale, so bisection
    over t2 in [0, fr_tolerance] converges to the boundary, returned from the
    feasible side with the stated relative tolerance.
    """
    if fr_tolerance <= 0:
        raise InfeasibleSynthesisError("FR tolerance must be > 0 (zero-measure domain)")
    fr_domain = location_zone_domain(fr_tolerance, fr_geom)

    def fits(t2: float) -> bool:
        doms = []
        for geom, zones in parts:
            dom = component_domain(geom, zones, ratio * t2, t2)
            doms.append(transported(dom, (fr_geom.offset_x - geom.offset_x, 0.0)))
        return sum_contained_in(doms, fr_domain)

    lo, hi = 0.0, fr_tolerance
    if fits(hi):
        return ratio * hi, hi
    for _ in range(200):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise InfeasibleSynthesisError("no positive zone scale fits the FR domain")
    return ratio * lo, lo


def write_vertices_csv(domain: DeviationDomain, path) -> None:
    """Export the vertex list as ``tz,rx,ry`` rows for external plotting."""
    if not domain.bounded:
        raise ValueError("unbounded domain has no vertex representation")
    with open(path, "w", encoding="utf-8") as f:
        f.write("tz,rx,ry\n")
        for v in domain.vertices:
            f.write(f"{float(v[0])!r},{float(v[1])!r},{float(v[2])!r}\n")
