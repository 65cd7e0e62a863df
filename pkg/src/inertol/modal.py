"""Modal characterization of rectangular-plane deviations.

A measured field of normal deviations over a meshed rectangular plane is
decomposed onto a basis of unit-amplitude deviation shapes: three rigid modes
(normal translation and the two tilts) followed by form modes of increasing
spatial frequency.  Because the basis is not orthogonal, coefficients are the
least-squares (dual-basis) projection; the unexplained remainder is the
residue.

Form modes are separable products of free-free beam eigenfunctions in x and y,
evaluated in their numerically stable half-range form

    symmetric:      cos(lam u)/cos(lam/2) + cosh(lam u)/cosh(lam/2)
    antisymmetric:  sin(lam u)/sin(lam/2) + sinh(lam u)/sinh(lam/2)

with u in [-1/2, 1/2] and lam solving tan(lam/2) +- tanh(lam/2) = 0.  Products
are ordered by ascending kx^2 + ky^2 (ties broken lexicographically on
(kx, ky)); the rigid tilt shapes enter the ordering with half the first
elastic wavenumber, which places the twist product ahead of single-direction
bending on near-square planes.  Every mode is scaled to unit maximum nodal
amplitude so coefficients read directly in mm.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from inertol.torsor import Torsor, transport

__all__ = [
    "PlaneMesh",
    "ModalBasis",
    "ModalSignature",
    "RankDeficientBasisError",
    "ZeroResidueError",
    "build_mesh",
    "build_basis",
    "signature",
    "reconstruct",
    "residue_with_modes",
    "residue_ratio",
    "rigid_to_sdt",
    "sdt_to_rigid",
    "read_deviation_csv",
    "write_deviation_csv",
]

RIGID_KINDS = ("rigid-translation", "rigid-rotation-x", "rigid-rotation-y")

_SNAP_TOL = 1.0e-9


class RankDeficientBasisError(ValueError):
    """A requested mode duplicates earlier content on the given mesh."""


class ZeroResidueError(ValueError):
    """The reference residue is zero (field fully spanned); the ratio is undefined."""


@dataclass(frozen=True)
class PlaneMesh:
    """Uniform rectangular grid centred on the plane centre O.

    Nodes are row-major with y varying slowest: index = iy * nx + ix, both
    coordinates ascending.
    """

    lx: float
    ly: float
    nx: int
    ny: int
    nodes: np.ndarray

    @property
    def node_count(self) -> int:
        return self.nx * self.ny


def build_mesh(lx: float, ly: float, nx: int, ny: int) -> PlaneMesh:
    """Mesh a plane of extents ``lx`` x ``ly`` with nx x ny nodes."""
    if lx <= 0 or ly <= 0:
        raise ValueError("plane extents must be > 0")
    if nx < 2 or ny < 2:
        raise ValueError("node counts must be >= 2")
    xs = np.linspace(-lx / 2.0, lx / 2.0, nx)
    ys = np.linspace(-ly / 2.0, ly / 2.0, ny)
    gx, gy = np.meshgrid(xs, ys)  # rows at constant y
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    nodes.setflags(write=False)
    return PlaneMesh(lx, ly, nx, ny, nodes)


@lru_cache(maxsize=None)
def _beam_eigenvalues(count: int) -> tuple[float, ...]:
    """First ``count`` free-free elastic eigenvalues lam (beam length 1)."""
    roots = []
    j_sym, j_anti = 1, 1
    while len(roots) < count:
        if len(roots) % 2 == 0:  # symmetric: tan x + tanh x = 0 on (j pi - pi/2, j pi)
            lo = j_sym * np.pi - np.pi / 2.0
            hi = j_sym * np.pi
            x = brentq(lambda x: np.tan(x) + np.tanh(x), lo + 1e-9, hi - 1e-12)
            j_sym += 1
        else:  # antisymmetric: tan x - tanh x = 0 on (j pi, j pi + pi/2)
            lo = j_anti * np.pi
            hi = j_anti * np.pi + np.pi / 2.0
            x = brentq(lambda x: np.tan(x) - np.tanh(x), lo + 1e-12, hi - 1e-9)
            j_anti += 1
        roots.append(2.0 * x)
    return tuple(roots)


def _beam_shape(q: int, u: np.ndarray) -> np.ndarray:
    """q-th member of the 1D family on u in [-1/2, 1/2]: const, linear, elastic."""
    if q == 0:
        return np.ones_like(u)
    if q == 1:
        return 2.0 * u
    lam = _beam_eigenvalues(q - 1)[q - 2]
    half = lam / 2.0
    if q % 2 == 0:  # elastic modes alternate symmetric / antisymmetric
        return np.cos(lam * u) / np.cos(half) + np.cosh(lam * u) / np.cosh(half)
    return np.sin(lam * u) / np.sin(half) + np.sinh(lam * u) / np.sinh(half)


def _beam_wavenumber(q: int, length: float) -> float:
    if q == 0:
        return 0.0
    lam1 = _beam_eigenvalues(1)[0]
    if q == 1:
        return lam1 / 2.0 / length
    return _beam_eigenvalues(q - 1)[q - 2] / length


@dataclass(frozen=True)
class ModalBasis:
    """Unit-amplitude deviation shapes over a mesh (columns of ``modes``)."""

    mesh: PlaneMesh
    modes: np.ndarray
    kinds: tuple[str, ...]
    wavenumbers: tuple[tuple[float, float], ...]
    gram_condition: float

    @property
    def mode_count(self) -> int:
        return self.modes.shape[1]


def build_basis(mesh: PlaneMesh, m: int) -> ModalBasis:
    """Build the first ``m`` modes (3 rigid + m-3 form shapes) on the mesh.

    Raises:
        RankDeficientBasisError: when a mode is linearly dependent on its
            predecessors at the mesh nodes (too-coarse grid), naming it.
    """
    k = mesh.node_count
    if not 3 <= m <= k:
        raise ValueError(f"mode count must satisfy 3 <= m <= {k}, got {m}")
    ux = mesh.nodes[:, 0] / mesh.lx  # in [-1/2, 1/2]
    uy = mesh.nodes[:, 1] / mesh.ly

    qmax = int(np.ceil(np.sqrt(m))) + 3
    entries = []
    for qx in range(qmax + 1):
        kx = _beam_wavenumber(qx, mesh.lx)
        for qy in range(qmax + 1):
            if (qx, qy) in ((0, 0), (0, 1), (1, 0)):
                continue  # rigid set, prepended explicitly
            ky = _beam_wavenumber(qy, mesh.ly)
            entries.append((kx * kx + ky * ky, kx, ky, qx, qy))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))

    cols = [np.ones(k), uy * 2.0, ux * 2.0]
    kinds = list(RIGID_KINDS)
    waves: list[tuple[float, float]] = [(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]
    for _, kx, ky, qx, qy in entries[: m - 3]:
        shape = _beam_shape(qx, ux) * _beam_shape(qy, uy)
        shape = shape / np.abs(shape).max()
        cols.append(shape)
        kinds.append("form")
        waves.append((kx, ky))

    modes = np.column_stack(cols)
    _check_rank(modes, kinds)
    gram = modes.T @ modes
    modes.setflags(write=False)
    return ModalBasis(mesh, modes, tuple(kinds), tuple(waves), float(np.linalg.cond(gram)))


def _check_rank(modes: np.ndarray, kinds: list[str]) -> None:
    _, r = np.linalg.qr(modes)
    diag = np.abs(np.diag(r))
    tol = modes.shape[0] * np.finfo(float).eps * diag.max()
    bad = np.nonzero(diag < tol)[0]
    if bad.size:
        j = int(bad[0])
        raise RankDeficientBasisError(
            f"mode {j + 1} ({kinds[j]}) is linearly dependent on earlier modes "
            "for this mesh; reduce the mode count or refine the grid"
        )


@dataclass(frozen=True)
class ModalSignature:
    """Least-squares coefficients (mm) and the reconstruction residue (mm)."""

    coeffs: np.ndarray
    residue: float


def signature(basis: ModalBasis, field: np.ndarray) -> ModalSignature:
    """Dual-basis characterization: coefficients minimizing ||D - B c||_2."""
    d = _as_field(basis, field)
    c, *_ = np.linalg.lstsq(basis.modes, d, rcond=None)
    residue = float(np.linalg.norm(d - basis.modes @ c))
    return ModalSignature(c, residue)


def reconstruct(basis: ModalBasis, coeffs: np.ndarray) -> np.ndarray:
    """Recomposed deviation field R = B c."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (basis.mode_count,):
        raise ValueError(
            f"expected {basis.mode_count} coefficients, got shape {c.shape}"
        )
    return basis.modes @ c


def residue_with_modes(basis: ModalBasis, field: np.ndarray, m_used: int) -> float:
    """Residue of the characterization truncated to the first ``m_used`` modes."""
    if not 3 <= m_used <= basis.mode_count:
        raise ValueError(f"m_used must satisfy 3 <= m_used <= {basis.mode_count}")
    d = _as_field(basis, field)
    b = basis.modes[:, :m_used]
    c, *_ = np.linalg.lstsq(b, d, rcond=None)
    return float(np.linalg.norm(d - b @ c))


def residue_ratio(basis: ModalBasis, field: np.ndarray, m_used: int) -> float:
    """Efficiency ratio rho = r(m_used) / r(all modes); >= 1, 1 at full truncation.

    Raises:
        ZeroResidueError: when the full basis reproduces the field exactly,
            leaving the ratio undefined.
    """
    d = _as_field(basis, field)
    r_all = residue_with_modes(basis, d, basis.mode_count)
    if r_all <= 1.0e-12 * max(1.0, float(np.linalg.norm(d))):
        raise ZeroResidueError(
            "field lies in the span of the full basis; residue ratio undefined"
        )
    return residue_with_modes(basis, d, m_used) / r_all


def rigid_to_sdt(
    c1: float, c2: float, c3: float, mesh: PlaneMesh, at: tuple[float, float] = (0.0, 0.0)
) -> Torsor:
    """Torsor whose displacement field equals the rigid modal content.

    At the centre O the map is diagonal: Tz = c1, Rx = 2 c2 / ly,
    Ry = -2 c3 / lx (a positive tilt-y coefficient lifts the +x edge, which is
    a negative right-handed rotation about +y).  For another expression point
    the diagonal map is composed with the torsor transport.
    """
    _require_in_plane(mesh, at)
    t0 = Torsor(c1, 2.0 * c2 / mesh.ly, -2.0 * c3 / mesh.lx, (0.0, 0.0))
    return t0 if at == (0.0, 0.0) else transport(t0, at)


def sdt_to_rigid(t: Torsor, mesh: PlaneMesh) -> tuple[float, float, float]:
    """Inverse of :func:`rigid_to_sdt`; exact round trip."""
    _require_in_plane(mesh, t.at)
    t0 = transport(t, (0.0, 0.0))
    return t0.tz, t0.rx * mesh.ly / 2.0, -t0.ry * mesh.lx / 2.0


def _require_in_plane(mesh: PlaneMesh, point: tuple[float, float]) -> None:
    if abs(point[0]) > mesh.lx / 2.0 or abs(point[1]) > mesh.ly / 2.0:
        raise ValueError(f"point {point} lies outside the plane rectangle")


def _as_field(basis: ModalBasis, field: np.ndarray) -> np.ndarray:
    d = np.asarray(field, dtype=float)
    if d.shape != (basis.mesh.node_count,):
        raise ValueError(
            f"field length {d.shape} does not match mesh node count "
            f"{basis.mesh.node_count}"
        )
    return d


def read_deviation_csv(path, mesh: PlaneMesh) -> np.ndarray:
    """Read an ``x,y,dev`` CSV and align rows to the mesh node order.

    Row order in the file is free; rows are matched to nodes by coordinates
    with a 1e-9 mm snap tolerance.  Every node must be covered exactly once.
    """
    values = np.full(mesh.node_count, np.nan)
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["x", "y", "dev"]:
            raise ValueError(f"{path}: expected header 'x,y,dev', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            x, y, dev = (float(v) for v in row)
            dist = np.abs(mesh.nodes[:, 0] - x) + np.abs(mesh.nodes[:, 1] - y)
            idx = int(np.argmin(dist))
            if dist[idx] > 2 * _SNAP_TOL:
                raise ValueError(f"{path}:{lineno}: point ({x}, {y}) matches no mesh node")
            if not np.isnan(values[idx]):
                raise ValueError(f"{path}:{lineno}: duplicate measurement for node {idx}")
            values[idx] = dev
    missing = np.nonzero(np.isnan(values))[0]
    if missing.size:
        raise ValueError(f"{path}: no measurement for {missing.size} mesh node(s)")
    return values


def write_deviation_csv(path, mesh: PlaneMesh, values: np.ndarray) -> None:
    """Write a deviation field in the ``x,y,dev`` interchange format."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.node_count,):
        raise ValueError("field length does not match mesh node count")
    with open(path, "w", encoding="utf-8") as f:
        f.write("x,y,dev\n")
        for (x, y), v in zip(mesh.nodes, values):
            f.write(f"{float(x)!r},{float(y)!r},{float(v)!r}\n")
