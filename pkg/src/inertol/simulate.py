"""Monte Carlo verification of 3D inertial tolerances.

For each repeat, a random batch configuration is drawn for every component
(mean and diagonal covariance of its torsor under the active scenario), one
million-ish assemblies are generated as sums of transported component
torsors, and the non-conformity rate is the fraction of resultants outside
the functional-requirement domain.  Repeats use independent derived seeds;
results are bit-identical for a given (scenario, seed) whatever the worker
count, because chunk streams derive deterministically from
(seed, scenario kind, repeat, chunk) and the reduction order is fixed.

Scenarios
---------
``centred-matched``
    mu = 0, per-axis sigma = I_axis / cpi: every axis batch meets its Cpi
    exactly.
``centred-random-sd``
    Centred, with the component's normalized variance budget split across the
    three axes by Dirichlet weights: sigma_axis = I_axis sqrt(3 w_axis) / cpi.
    The quadratic aggregate of the normalized axis inertias is held at the
    requested capability while individual axes wander.
``off-centred-random``
    The random split above, plus a positive mean on every axis drawn
    uniformly up to ``cap`` times the axis budget; sigma is reduced so the
    axis inertia still meets its (split) budget.  All off-centrings positive:
    the pessimistic no-compensation pattern.

The common-random-number discipline (repeat streams independent of cpi and
cap) pairs configurations across a capability sweep, so NCR monotonicity in
cpi holds pointwise per repeat rather than only on averages.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from inertol import domains as dm
from inertol.allocation import MechanismSpec, ToleranceSet3D
from inertol.batch3d import TorsorBatch
from inertol.inertia1d import PPM, ncr_std
from inertol.torsor import SurfaceGeometry, Torsor, corner_influence_rows, transport

__all__ = [
    "Scenario",
    "SimReport",
    "Table1Report",
    "SCENARIO_KINDS",
    "sample_component",
    "sample_multinormal",
    "assembly_deltas",
    "assemble",
    "fr_conformity_domain",
    "conform",
    "estimate_ncr",
    "run_table1",
]

SCENARIO_KINDS = ("centred-matched", "centred-random-sd", "off-centred-random")
_KIND_IDS = {kind: i + 1 for i, kind in enumerate(SCENARIO_KINDS)}

_CHUNK = 1 << 18
_MIN_ASSEMBLIES = 10_000


@dataclass(frozen=True)
class Scenario:
    """One simulation setup: sampling scheme, capability, budget and seed."""

    kind: str
    cpi: float
    assemblies: int
    repeats: int
    seed: int
    offcentring_cap: float = 1.0 / 3.0
    criterion: str = "per-axis"

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"kind must be one of {SCENARIO_KINDS}, got {self.kind!r}")
        if self.cpi <= 0:
            raise ValueError("cpi must be > 0")
        if self.assemblies < _MIN_ASSEMBLIES:
            raise ValueError(f"assemblies must be >= {_MIN_ASSEMBLIES} for NCR work")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not 0.0 < self.offcentring_cap <= 1.0:
            raise ValueError("offcentring_cap must lie in (0, 1]")
        if self.criterion not in ("per-axis", "adjusted"):
            raise ValueError("criterion must be 'per-axis' or 'adjusted'")


def sample_component(
    tols_axis: tuple[float, float, float],
    scenario: Scenario,
    rng: np.random.Generator,
    geom: SurfaceGeometry | None = None,
) -> TorsorBatch:
    """Draw one component's batch parameters under the scenario.

    The off-centring cap is a fraction of each axis's inertia budget
    (tolerance over cpi, after the variance split), which keeps the reduced
    sigma real for any cap in (0, 1] and lets capability sweeps reuse one cap.
    """
    tols = np.asarray(tols_axis, dtype=float)
    budget = tols / scenario.cpi
    if scenario.kind != "centred-matched":
        w = rng.dirichlet(np.ones(3))
        budget = budget * np.sqrt(3.0 * w)
    mu = np.zeros(3)
    sigma = budget
    if scenario.kind == "off-centred-random":
        mu = scenario.offcentring_cap * budget * rng.uniform(0.0, 1.0, 3)
        sigma = np.sqrt(budget * budget - mu * mu)
    if scenario.criterion == "adjusted":
        if geom is None:
            raise ValueError("adjusted criterion requires the surface geometry")
        rows = corner_influence_rows(geom)
        corner = np.sqrt((rows @ mu) ** 2 + (rows * rows) @ (sigma * sigma))
        scale = (tols[0] / scenario.cpi) / corner.max()
        mu = mu * scale
        sigma = sigma * scale
    return TorsorBatch(mu, np.diag(sigma * sigma))


def sample_multinormal(
    mean: np.ndarray, cov: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Multinormal draws via spectral factorization, tolerant of rank deficiency."""
    w, v = np.linalg.eigh(np.asarray(cov, dtype=float))
    w[w < len(w) * np.finfo(float).eps * max(w.max(), 0.0)] = 0.0
    factor = v * np.sqrt(w)
    return rng.standard_normal((n, len(w))) @ factor.T + np.asarray(mean, dtype=float)


def assembly_deltas(mech: MechanismSpec) -> list[tuple[float, float]]:
    """Transport offsets applied to each component to reach the FR frame."""
    fr_off = mech.surface(mech.fr_surface).geometry.offset_x
    deltas = []
    for comp in mech.components:
        if mech.simulation.assembly_levers == "physical":
            deltas.append((fr_off - mech.surface(comp.surface).geometry.offset_x, 0.0))
        else:
            deltas.append((0.0, 0.0))
    return deltas


def _transport_matrix(delta: tuple[float, float]) -> np.ndarray:
    dx, dy = delta
    return np.array([[1.0, dy, -dx], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def assemble(torsors: list[Torsor], mech: MechanismSpec) -> Torsor:
    """Resultant torsor at the FR frame: sum of the transported components."""
    if len(torsors) != mech.n_components:
        raise ValueError(f"expected {mech.n_components} torsors, got {len(torsors)}")
    fr_off = mech.surface(mech.fr_surface).geometry.offset_x
    total = np.zeros(3)
    for t, delta in zip(torsors, assembly_deltas(mech)):
        moved = transport(t, (t.at[0] + delta[0], t.at[1] + delta[1]))
        total += np.array([moved.tz, moved.rx, moved.ry])
    return Torsor(total[0], total[1], total[2], (fr_off, 0.0))


def fr_conformity_domain(mech: MechanismSpec) -> dm.DeviationDomain:
    """The FR acceptance region used by the simulation, per the configured mode."""
    fr_geom = mech.surface(mech.fr_surface).geometry
    if mech.simulation.conformity == "fr-plate":
        return dm.location_zone_domain(mech.fr_tolerance, fr_geom)
    half = mech.fr_tolerance / 2.0
    normals = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    return dm.DeviationDomain(normals, np.array([half, half]), None)


def conform(resultant: Torsor | np.ndarray, fr_domain: dm.DeviationDomain):
    """Membership of the resultant(s) in the FR domain (all facet inequalities)."""
    if isinstance(resultant, Torsor):
        return bool(
            dm.contains(fr_domain, np.array([resultant.tz, resultant.rx, resultant.ry]))
        )
    return dm.contains(fr_domain, resultant)


@dataclass(frozen=True)
class SimReport:
    """NCR estimates over the repeats, with the sampling-spread prediction."""

    scenario: Scenario
    repeat_ncrs: tuple[float, ...]
    mean_ncr: float
    std_ncr: float
    worst_ncr: float
    predicted_std: float
    histogram_counts: tuple[int, ...]
    histogram_edges: tuple[float, ...]
    factorization: str = "spectral-eigh"

    def to_dict(self) -> dict:
        return {
            "scenario": {
                "kind": self.scenario.kind,
                "cpi": self.scenario.cpi,
                "assemblies": self.scenario.assemblies,
                "repeats": self.scenario.repeats,
                "seed": self.scenario.seed,
                "offcentring_cap": self.scenario.offcentring_cap,
                "criterion": self.scenario.criterion,
            },
            "mean_ncr_ppm": self.mean_ncr,
            "std_ncr_ppm": self.std_ncr,
            "worst_ncr_ppm": self.worst_ncr,
            "predicted_std_ppm": self.predicted_std,
            "repeat_ncrs_ppm": list(self.repeat_ncrs),
            "histogram": {
                "counts": list(self.histogram_counts),
                "edges": list(self.histogram_edges),
            },
            "factorization": self.factorization,
        }


def _repeat_ncr(
    scenario: Scenario, mech: MechanismSpec, tols: ToleranceSet3D, repeat: int
) -> float:
    """NCR (ppm) of one repeat; streams derive from (seed, kind, repeat, chunk)."""
    n = scenario.assemblies
    n_chunks = (n + _CHUNK - 1) // _CHUNK
    root = np.random.SeedSequence(
        entropy=scenario.seed, spawn_key=(_KIND_IDS[scenario.kind], repeat)
    )
    streams = root.spawn(n_chunks + 1)
    cfg_rng = np.random.default_rng(streams[0])

    batches = []
    for i, comp in enumerate(mech.components):
        geom = mech.surface(comp.surface).geometry
        batches.append(sample_component(tols.component(i), scenario, cfg_rng, geom))

    matrices = [_transport_matrix(d) for d in assembly_deltas(mech)]
    factors = []
    shifts = []
    for batch, m in zip(batches, matrices):
        w, v = np.linalg.eigh(batch.cov)
        w[w < len(w) * np.finfo(float).eps * max(w.max(), 0.0)] = 0.0
        factor = v * np.sqrt(w)
        factors.append(m @ factor)  # draw then transport, fused
        shifts.append(m @ batch.mean)
    shift = np.sum(shifts, axis=0)

    domain = fr_conformity_domain(mech)
    normals_t = domain.normals.T
    offsets = domain.offsets
    tol = 1.0e-9 * np.maximum(1.0, np.abs(offsets))

    bad = 0
    done = 0
    for chunk_idx in range(n_chunks):
        size = min(_CHUNK, n - done)
        rng = np.random.default_rng(streams[1 + chunk_idx])
        resultant = np.broadcast_to(shift, (size, 3)).copy()
        for factor in factors:
            resultant += rng.standard_normal((size, 3)) @ factor.T
        ok = np.all(resultant @ normals_t <= offsets + tol, axis=1)
        bad += int(size - ok.sum())
        done += size
    return bad / n * PPM


def estimate_ncr(
    scenario: Scenario,
    mech: MechanismSpec,
    tols: ToleranceSet3D,
    workers: int = 1,
) -> SimReport:
    """Estimate the assembly NCR over the scenario's repeats.

    Deterministic for a given (scenario, seed); ``workers`` only distributes
    repeats over processes.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    indices = range(scenario.repeats)
    if workers == 1 or scenario.repeats == 1:
        ncrs = [_repeat_ncr(scenario, mech, tols, r) for r in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            ncrs = list(
                pool.map(
                    _repeat_ncr,
                    (scenario,) * scenario.repeats,
                    (mech,) * scenario.repeats,
                    (tols,) * scenario.repeats,
                    indices,
                )
            )
    arr = np.array(ncrs)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    counts, edges = np.histogram(arr, bins=min(30, max(5, len(arr) // 10 + 1)))
    return SimReport(
        scenario=scenario,
        repeat_ncrs=tuple(float(v) for v in arr),
        mean_ncr=mean,
        std_ncr=std,
        worst_ncr=float(arr.max()),
        predicted_std=ncr_std(mean, scenario.assemblies) if mean > 0 else 0.0,
        histogram_counts=tuple(int(c) for c in counts),
        histogram_edges=tuple(float(e) for e in edges),
    )


@dataclass(frozen=True)
class Table1Report:
    """Mean and worst NCR per scenario row and capability level."""

    cpi_values: tuple[float, ...]
    rows: tuple[tuple[str, tuple[SimReport, ...]], ...]

    def to_dict(self) -> dict:
        return {
            "cpi": list(self.cpi_values),
            "rows": {
                label: [
                    {
                        "cpi": rep.scenario.cpi,
                        "mean_ncr_ppm": rep.mean_ncr,
                        "worst_ncr_ppm": rep.worst_ncr,
                        "std_ncr_ppm": rep.std_ncr,
                    }
                    for rep in reports
                ]
                for label, reports in self.rows
            },
        }


def run_table1(
    mech: MechanismSpec,
    tols: ToleranceSet3D,
    cpi_values: tuple[float, ...] = (1.0, 1.16, 1.33, 1.5),
    assemblies: int = 1_000_000,
    repeats: int = 2000,
    seed: int = 0,
    workers: int = 1,
    caps: tuple[float, ...] = (1.0 / 3.0, 1.0),
) -> Table1Report:
    """Sweep the three scenarios (plus off-centring cap variants) over cpi.

    Repeat streams do not depend on cpi or cap, so every column of a row
    reuses the same component configurations at scaled capability.
    """
    rows: list[tuple[str, tuple[SimReport, ...]]] = []
    base = Scenario(
        kind="centred-matched",
        cpi=1.0,
        assemblies=assemblies,
        repeats=repeats,
        seed=seed,
        criterion=mech.simulation.criterion,
    )
    for kind in ("centred-matched", "centred-random-sd"):
        reports = tuple(
            estimate_ncr(replace(base, kind=kind, cpi=c), mech, tols, workers)
            for c in cpi_values
        )
        rows.append((kind, reports))
    for cap in caps:
        reports = tuple(
            estimate_ncr(
                replace(base, kind="off-centred-random", cpi=c, offcentring_cap=cap),
                mech,
                tols,
                workers,
            )
            for c in cpi_values
        )
        rows.append((f"off-centred-random(cap={cap:g})", reports))
    return Table1Report(tuple(cpi_values), tuple(rows))
