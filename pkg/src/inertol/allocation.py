"""3D inertial tolerance synthesis for the three-part lever-arm stack-up.

Each small-displacement component of the stack (normal translation, tilt
about x, tilt about y) carries its own 1D dimension chain.  Translations have
unit influence; a tilt acts on the functional requirement through half its
chain lever (the worst point of a plane sits half an extent away from its
centre), so the chain for an axis with lever L allocates with influence L/2.
Rotation chains are deliberately unbalanced by feasibility weights so the
last component receives double tolerance, mirroring the worst-case zoning.

The worst-case counterpart (:func:`inertol.domains.synthesize_worst_case`)
and the homothety comparison of the two approaches live behind the same
mechanism description.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from inertol import domains as dm
from inertol.inertia1d import AllocationInput, allocate_weighted
from inertol.torsor import SurfaceGeometry

__all__ = [
    "SurfaceSpec",
    "ComponentSpec",
    "SimulationSettings",
    "MechanismSpec",
    "ToleranceSet3D",
    "ComponentComparison",
    "HomothetyReport",
    "chain_translation",
    "chain_rotation_x",
    "chain_rotation_y",
    "allocate",
    "combination_ratios",
    "worst_case_tolerances",
    "compare_to_worst_case",
    "fibonacci_ellipsoid",
]

AXES = ("tz", "rx", "ry")

CONFORMITY_MODES = ("fr-interval", "fr-plate")
LEVER_MODES = ("none", "physical")
CRITERIA = ("per-axis", "adjusted")


@dataclass(frozen=True)
class SurfaceSpec:
    """A toleranced plane: extents, frame offset along x, zone callouts."""

    name: str
    geometry: SurfaceGeometry
    zones: tuple[str, ...]


@dataclass(frozen=True)
class ComponentSpec:
    """A stack component: its toleranced surface and per-axis feasibilities."""

    index: int
    surface: str
    feasibility: tuple[float, float, float]  # (tz, rx, ry)


@dataclass(frozen=True)
class SimulationSettings:
    """Conventions of the Monte Carlo verification runs.

    ``conformity``: "fr-interval" checks the resultant translation against
    +-t/2 (the per-axis chain budget view under which the allocation formulas
    are exact); "fr-plate" checks the full corner polytope of the FR surface.
    ``assembly_levers``: "none" sums chains axis-wise; "physical" transports
    each component over its frame offset, coupling tilts into translation.
    ``criterion``: how scenario sampling meters capability, per SDT axis or
    through the adjusted (worst-corner) inertia against the translation
    tolerance.
    """

    conformity: str = "fr-interval"
    assembly_levers: str = "none"
    criterion: str = "per-axis"

    def __post_init__(self) -> None:
        if self.conformity not in CONFORMITY_MODES:
            raise ValueError(f"conformity must be one of {CONFORMITY_MODES}")
        if self.assembly_levers not in LEVER_MODES:
            raise ValueError(f"assembly_levers must be one of {LEVER_MODES}")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")


@dataclass(frozen=True)
class MechanismSpec:
    """Stack-up description driving allocation, synthesis and simulation."""

    fr_tolerance: float
    lever_d: float
    fr_surface: str
    surfaces: tuple[SurfaceSpec, ...]
    components: tuple[ComponentSpec, ...]
    lever_rx: float
    lever_ry: float
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    reference_ratios: tuple[float | None, ...] | None = None

    def __post_init__(self) -> None:
        if self.fr_tolerance <= 0:
            raise ValueError("fr_tolerance must be > 0")
        if self.lever_rx <= 0 or self.lever_ry <= 0:
            raise ValueError("chain levers must be > 0")
        names = [s.name for s in self.surfaces]
        if len(set(names)) != len(names):
            raise ValueError("duplicate surface names")
        if self.fr_surface not in names:
            raise ValueError(f"fr_surface {self.fr_surface!r} is not a defined surface")
        for comp in self.components:
            if comp.surface not in names:
                raise ValueError(
                    f"component {comp.index} references unknown surface {comp.surface!r}"
                )
            if any(f <= 0 for f in comp.feasibility):
                raise ValueError(f"component {comp.index} feasibilities must be > 0")

    @property
    def n_components(self) -> int:
        return len(self.components)

    def surface(self, name: str) -> SurfaceSpec:
        for s in self.surfaces:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass(frozen=True)
class ToleranceSet3D:
    """Per-component inertial tolerances: translations in mm, tilts in rad."""

    tz: tuple[float, ...]
    rx: tuple[float, ...]
    ry: tuple[float, ...]

    def __post_init__(self) -> None:
        if not len(self.tz) == len(self.rx) == len(self.ry):
            raise ValueError("per-axis tuples must share length")
        if any(v <= 0 for v in self.tz + self.rx + self.ry):
            raise ValueError("tolerances must be > 0")

    def component(self, i: int) -> tuple[float, float, float]:
        return self.tz[i], self.rx[i], self.ry[i]


def _chain(mech: MechanismSpec, influence: float, axis: int) -> tuple[float, ...]:
    feas = tuple(c.feasibility[axis] for c in mech.components)
    tols = allocate_weighted(
        AllocationInput(
            fr_interval=mech.fr_tolerance,
            influences=(influence,) * mech.n_components,
            feasibilities=feas,
        )
    )
    return tuple(t.value for t in tols)


def chain_translation(mech: MechanismSpec) -> tuple[float, ...]:
    """Translation chain: unit influences, I = t/(6 sqrt(n)) under equal weights."""
    return _chain(mech, 1.0, 0)


def chain_rotation_x(mech: MechanismSpec) -> tuple[float, ...]:
    """Tilt-about-x chain with influence lever_rx / 2 per component."""
    return _chain(mech, mech.lever_rx / 2.0, 1)


def chain_rotation_y(mech: MechanismSpec) -> tuple[float, ...]:
    """Tilt-about-y chain with influence lever_ry / 2 per component."""
    return _chain(mech, mech.lever_ry / 2.0, 2)


def allocate(mech: MechanismSpec) -> ToleranceSet3D:
    """Run the three axis chains and bundle the per-component tolerances."""
    return ToleranceSet3D(
        chain_translation(mech), chain_rotation_x(mech), chain_rotation_y(mech)
    )


def combination_ratios(tols: ToleranceSet3D) -> list[dict[str, float]]:
    """Per-component ratios of the translation tolerance over each tilt tolerance.

    The translation tolerance is the largest and serves as the reference; the
    ratios express how a tilt trades against it in the combined criterion.
    """
    return [
        {"rx": tols.tz[i] / tols.rx[i], "ry": tols.tz[i] / tols.ry[i]}
        for i in range(len(tols.tz))
    ]


def worst_case_tolerances(mech: MechanismSpec) -> tuple[float, float]:
    """Worst-case (t1, t2) for the mechanism via deviation-domain synthesis."""
    parts = [(s.geometry, s.zones) for s in mech.surfaces]
    fr_geom = mech.surface(mech.fr_surface).geometry
    return dm.synthesize_worst_case(parts, fr_geom, mech.fr_tolerance)


@dataclass(frozen=True)
class ComponentComparison:
    """Per-axis homothety of one component's inertial spread over its WC spread."""

    component: int
    surface: str
    wc_half_widths: tuple[float, float, float]
    inertial_semi_axes: tuple[float, float, float]
    axis_ratios: dict[str, float]
    geometric_mean: float
    reference_ratio: float | None


@dataclass(frozen=True)
class HomothetyReport:
    components: tuple[ComponentComparison, ...]
    wc: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "worst_case": {"t1_mm": self.wc[0], "t2_mm": self.wc[1]},
            "components": [
                {
                    "component": c.component,
                    "surface": c.surface,
                    "wc_half_widths": list(c.wc_half_widths),
                    "inertial_semi_axes": list(c.inertial_semi_axes),
                    "axis_ratios": c.axis_ratios,
                    "geometric_mean": c.geometric_mean,
                    "reference_ratio": c.reference_ratio,
                }
                for c in self.components
            ],
        }


def compare_to_worst_case(
    tols: ToleranceSet3D, wc: tuple[float, float], mech: MechanismSpec
) -> HomothetyReport:
    """Compare centred 3-sigma spreads allowed by the two tolerancings.

    Both hypotheses put six standard deviations across the admissible range of
    each axis: the worst-case per-axis sigma is a third of the domain axis
    half-width, the inertial sigma at Cpi = 1 is the axis tolerance itself.
    The per-axis ratio is therefore 3 I_axis / half_width; the geometric mean
    gives the single homothety scale.  Reference ratios carried by the
    mechanism description are echoed for annotation only; their underlying
    construction is not part of the description, so no equality is asserted.
    """
    t1, t2 = wc
    comparisons = []
    for i, comp in enumerate(mech.components):
        surf = mech.surface(comp.surface)
        dom = dm.component_domain(surf.geometry, surf.zones, t1, t2)
        halves = tuple(
            dm.support(dom, np.eye(3)[k]) for k in range(3)
        )
        inertial = tuple(3.0 * v for v in tols.component(i))
        ratios = {ax: inertial[k] / halves[k] for k, ax in enumerate(AXES)}
        gmean = math.prod(ratios.values()) ** (1.0 / 3.0)
        ref = None
        if mech.reference_ratios is not None:
            ref = mech.reference_ratios[i]
        comparisons.append(
            ComponentComparison(
                comp.index, comp.surface, halves, inertial, ratios, gmean, ref
            )
        )
    return HomothetyReport(tuple(comparisons), (t1, t2))


def fibonacci_ellipsoid(semi_axes: tuple[float, float, float], n: int = 256) -> np.ndarray:
    """Deterministic point cloud on an ellipsoid surface, for plotting exports."""
    i = np.arange(n, dtype=float)
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    z = 1.0 - 2.0 * (i + 0.5) / n
    theta = 2.0 * math.pi * i / golden
    r = np.sqrt(1.0 - z * z)
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    return pts * np.asarray(semi_axes, dtype=float)
