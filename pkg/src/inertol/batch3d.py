"""Batch statistics for torsor and modal-signature populations.

A batch of measured surfaces reduces to the mean and covariance of its modal
signatures; linearity of the reconstruction propagates both to the nodes:
mean shape B c_bar and node variances diag(B Sigma B^T).  The surface batch
inertia is the quadratic mean over nodes of the per-node inertias
sqrt(mean^2 + var).  The adjusted criterion guards against compensation
between well and poorly behaved regions by taking the worst per-point inertia
instead; with location and orientation deviations only, the displacement
field is affine in the plane coordinates, so the extreme is always attained
at one of the four corners (a form-deviation extension must re-evaluate on
all nodes).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from inertol.modal import ModalBasis
from inertol.torsor import SurfaceGeometry, Torsor, corner_influence_rows, transport

__all__ = [
    "SignatureBatch",
    "TorsorBatch",
    "NotPositiveSemidefiniteError",
    "ensure_psd",
    "mean_shape",
    "variance_shape",
    "surface_inertia",
    "corner_inertias",
    "adjusted_inertia",
    "empirical_signature_batch",
    "empirical_torsor_batch",
]

PSD_RTOL = 1.0e-12


class NotPositiveSemidefiniteError(ValueError):
    """Covariance has eigenvalues below the admitted rounding tolerance."""


def ensure_psd(cov: np.ndarray) -> np.ndarray:
    """Validate a symmetric PSD covariance, clipping eigenvalue rounding noise.

    Eigenvalues down to -PSD_RTOL * trace are treated as zeros; anything more
    negative is rejected.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(cov, cov.T, rtol=0, atol=1.0e-12 * max(1.0, np.abs(cov).max())):
        raise ValueError("covariance must be symmetric")
    w, v = np.linalg.eigh(cov)
    floor = -PSD_RTOL * max(np.trace(cov), np.finfo(float).tiny)
    if np.any(w < floor):
        raise NotPositiveSemidefiniteError(
            f"covariance eigenvalue {w.min():g} below tolerance {floor:g}"
        )
    if np.any(w < 0):
        w = np.clip(w, 0.0, None)
        cov = (v * w) @ v.T
    return cov


@dataclass(frozen=True)
class SignatureBatch:
    """Mean vector and covariance of a batch of modal signatures."""

    mean_coeffs: np.ndarray
    cov_coeffs: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean_coeffs, dtype=float)
        cov = ensure_psd(self.cov_coeffs)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match mean length")
        object.__setattr__(self, "mean_coeffs", mean)
        object.__setattr__(self, "cov_coeffs", cov)


@dataclass(frozen=True)
class TorsorBatch:
    """Mean (tz, rx, ry) and 3x3 covariance of a torsor batch at a point."""

    mean: np.ndarray
    cov: np.ndarray
    at: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        if mean.shape != (3,):
            raise ValueError("mean must have shape (3,)")
        cov = ensure_psd(self.cov)
        if cov.shape != (3, 3):
            raise ValueError("covariance must be 3x3")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def mean_shape(basis: ModalBasis, batch: SignatureBatch) -> np.ndarray:
    """Mean deviation of every node: B c_bar."""
    if batch.mean_coeffs.size != basis.mode_count:
        raise ValueError("signature length does not match basis mode count")
    return basis.modes @ batch.mean_coeffs


def variance_shape(basis: ModalBasis, batch: SignatureBatch) -> np.ndarray:
    """Per-node variance: the diagonal of B Sigma_C B^T."""
    if batch.mean_coeffs.size != basis.mode_count:
        raise ValueError("signature length does not match basis mode count")
    b = basis.modes
    return np.einsum("ij,jk,ik->i", b, batch.cov_coeffs, b)


def surface_inertia(mean_field: np.ndarray, variance_field: np.ndarray) -> float:
    """Quadratic mean over nodes of the per-node inertias sqrt(mean^2 + var)."""
    mu = np.asarray(mean_field, dtype=float)
    var = np.asarray(variance_field, dtype=float)
    if mu.shape != var.shape:
        raise ValueError("mean and variance fields must align")
    return float(np.sqrt(np.mean(mu * mu + var)))


def corner_inertias(batch: TorsorBatch, geom: SurfaceGeometry) -> np.ndarray:
    """Per-corner inertias sqrt((a mu)^2 + a Sigma a^T), a = (1, +-ly/2, -+lx/2)."""
    if batch.at != (0.0, 0.0):
        raise ValueError("torsor batch must be expressed at the surface centre")
    rows = corner_influence_rows(geom)
    means = rows @ batch.mean
    variances = np.einsum("ij,jk,ik->i", rows, batch.cov, rows)
    return np.sqrt(means * means + variances)


def adjusted_inertia(batch: TorsorBatch, geom: SurfaceGeometry) -> float:
    """Worst per-corner inertia of the batch (the adjusted acceptance criterion)."""
    return float(corner_inertias(batch, geom).max())


def empirical_signature_batch(signatures: np.ndarray) -> SignatureBatch:
    """Sample mean and unbiased covariance (divisor n-1) of signature rows."""
    sigs = np.asarray(signatures, dtype=float)
    if sigs.ndim != 2 or sigs.shape[0] < 2:
        raise ValueError("need at least 2 signatures, shaped (n, m)")
    return SignatureBatch(sigs.mean(axis=0), np.cov(sigs, rowvar=False, ddof=1))


def empirical_torsor_batch(
    torsors: Sequence[Torsor] | np.ndarray, at: tuple[float, float] = (0.0, 0.0)
) -> TorsorBatch:
    """Sample statistics of a torsor population, re-expressed at ``at``.

    Accepts Torsor objects (transported individually) or an (n, 3) component
    array already expressed at the target point.
    """
    if isinstance(torsors, np.ndarray):
        rows = np.asarray(torsors, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 3:
            raise ValueError("component array must be shaped (n, 3)")
    else:
        moved = [transport(t, at) for t in torsors]
        rows = np.array([[t.tz, t.rx, t.ry] for t in moved])
    if rows.shape[0] < 2:
        raise ValueError("need at least 2 torsors")
    cov = np.cov(rows, rowvar=False, ddof=1)
    return TorsorBatch(rows.mean(axis=0), cov, at)
