"""Inertial statistical tolerancing for planar stack-ups.

The package covers the full chain from 1D inertial acceptance to 3D
verification: batch inertia and capability (:mod:`inertol.inertia1d`),
modal characterization of measured plane deviations (:mod:`inertol.modal`),
small-displacement-torsor algebra and convex deviation domains
(:mod:`inertol.torsor`, :mod:`inertol.domains`), batch statistics and the
adjusted inertia criterion (:mod:`inertol.batch3d`), tolerance synthesis for
the three-part lever-arm case study (:mod:`inertol.allocation`) and Monte
Carlo non-conformity estimation (:mod:`inertol.simulate`).
"""

from inertol.inertia1d import (
    Batch1D,
    InertialTolerance,
    AllocationInput,
    inertia,
    cpi,
    allocate_uniform,
    allocate_weighted,
    cpi_for_cpk,
    cpk_from_ncr,
    ncr_from_cpk,
    ncr_std,
)
from inertol.torsor import Torsor, SurfaceGeometry, transport, corner_deviations
from inertol.domains import DeviationDomain

__version__ = "0.1.0"

__all__ = [
    "Batch1D",
    "InertialTolerance",
    "AllocationInput",
    "inertia",
    "cpi",
    "allocate_uniform",
    "allocate_weighted",
    "cpi_for_cpk",
    "cpk_from_ncr",
    "ncr_from_cpk",
    "ncr_std",
    "Torsor",
    "SurfaceGeometry",
    "transport",
    "corner_deviations",
    "DeviationDomain",
    "__version__",
]
