"""Mechanism configuration files.

INI-style ``.cfg`` files describe a stack-up: the functional requirement, the
toleranced surfaces with their zone callouts, the components with per-axis
feasibilities, the chain levers and the simulation conventions.  Keys carry
unit suffixes (``_mm``) so a value can never be misread.  Schema errors raise
:class:`ConfigError` naming the offending ``section.key``.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from inertol.allocation import (
    ComponentSpec,
    MechanismSpec,
    SimulationSettings,
    SurfaceSpec,
)
from inertol.torsor import SurfaceGeometry

__all__ = ["ConfigError", "load_mechanism"]

_ZONE_KINDS = {"location", "orientation"}


class ConfigError(ValueError):
    """A configuration file violates the schema; the message names the key."""


def _get(parser: configparser.ConfigParser, section: str, key: str) -> str:
    if not parser.has_section(section):
        raise ConfigError(f"missing section [{section}]")
    if not parser.has_option(section, key):
        raise ConfigError(f"missing key {section}.{key}")
    return parser.get(section, key)


def _get_float(parser, section, key, positive=False) -> float:
    raw = _get(parser, section, key)
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: not a number: {raw!r}") from None
    if positive and value <= 0:
        raise ConfigError(f"{section}.{key}: must be > 0, got {value}")
    return value


def _get_choice(parser, section, key, choices, default=None) -> str:
    if default is not None and not (
        parser.has_section(section) and parser.has_option(section, key)
    ):
        return default
    raw = _get(parser, section, key).strip()
    if raw not in choices:
        raise ConfigError(f"{section}.{key}: must be one of {sorted(choices)}, got {raw!r}")
    return raw


def load_mechanism(path) -> MechanismSpec:
    """Parse a mechanism ``.cfg`` file into a :class:`MechanismSpec`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc

    fr_tolerance = _get_float(parser, "mechanism", "fr_tolerance_mm", positive=True)
    lever_d = _get_float(parser, "mechanism", "lever_d_mm")
    fr_surface = _get(parser, "mechanism", "fr_surface").strip()

    surfaces = []
    for section in parser.sections():
        if not section.startswith("surface."):
            continue
        name = section.split(".", 1)[1]
        lx = _get_float(parser, section, "lx_mm", positive=True)
        ly = _get_float(parser, section, "ly_mm", positive=True)
        offset = _get_float(parser, section, "offset_x_mm")
        zones = tuple(
            z.strip() for z in _get(parser, section, "zones").split(",") if z.strip()
        )
        bad = set(zones) - _ZONE_KINDS
        if bad:
            raise ConfigError(
                f"{section}.zones: unknown zone kind(s) {sorted(bad)}; "
                f"allowed: {sorted(_ZONE_KINDS)}"
            )
        if not zones:
            raise ConfigError(f"{section}.zones: at least one zone kind required")
        surfaces.append(SurfaceSpec(name, SurfaceGeometry(lx, ly, offset), zones))
    if not surfaces:
        raise ConfigError("no [surface.*] sections found")

    components = []
    for section in sorted(
        (s for s in parser.sections() if s.startswith("component.")),
        key=lambda s: int(s.split(".", 1)[1]),
    ):
        index = int(section.split(".", 1)[1])
        surface = _get(parser, section, "surface").strip()
        feas = tuple(
            _get_float(parser, section, f"feasibility_{ax}", positive=True)
            for ax in ("tz", "rx", "ry")
        )
        components.append(ComponentSpec(index, surface, feas))
    if not components:
        raise ConfigError("no [component.*] sections found")

    lever_rx = _get_float(parser, "chains", "lever_rx_mm", positive=True)
    lever_ry = _get_float(parser, "chains", "lever_ry_mm", positive=True)

    simulation = SimulationSettings(
        conformity=_get_choice(
            parser, "simulation", "conformity",
            {"fr-interval", "fr-plate"}, default="fr-interval",
        ),
        assembly_levers=_get_choice(
            parser, "simulation", "assembly_levers",
            {"none", "physical"}, default="none",
        ),
        criterion=_get_choice(
            parser, "simulation", "criterion",
            {"per-axis", "adjusted"}, default="per-axis",
        ),
    )

    reference = None
    if parser.has_section("compare"):
        refs: list[float | None] = []
        for comp in components:
            key = f"reference_ratio_component_{comp.index}"
            if parser.has_option("compare", key):
                refs.append(_get_float(parser, "compare", key, positive=True))
            else:
                refs.append(None)
        reference = tuple(refs)

    try:
        return MechanismSpec(
            fr_tolerance=fr_tolerance,
            lever_d=lever_d,
            fr_surface=fr_surface,
            surfaces=tuple(surfaces),
            components=tuple(components),
            lever_rx=lever_rx,
            lever_ry=lever_ry,
            simulation=simulation,
            reference_ratios=reference,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
