"""Command-line surface.

Subcommands tie the library together: mechanism configs in, deterministic
JSON reports and CSV sidecars out.  All outputs are written atomically
(temp file + rename), so schema or numerical failures never leave partial
artifacts.

Exit codes: 0 success, 2 configuration/schema error (message names the
offending key), 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from inertol import allocation as al
from inertol import batch3d, domains as dm, modal, simulate as sim
from inertol.batch3d import NotPositiveSemidefiniteError
from inertol.config import ConfigError, load_mechanism
from inertol.torsor import SurfaceGeometry

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _mesh_from_args(args) -> modal.PlaneMesh:
    return modal.build_mesh(args.lx, args.ly, args.nx, args.ny)


def _cmd_allocate(args) -> int:
    mech = load_mechanism(args.config)
    tols = al.allocate(mech)
    ratios = al.combination_ratios(tols)
    out = Path(args.out)
    _write_json(
        out / "allocation.json",
        {
            "fr_tolerance_mm": mech.fr_tolerance,
            "components": [
                {
                    "component": comp.index,
                    "surface": comp.surface,
                    "I_tz_mm": tols.tz[i],
                    "I_rx_rad": tols.rx[i],
                    "I_ry_rad": tols.ry[i],
                    "ratio_rx": ratios[i]["rx"],
                    "ratio_ry": ratios[i]["ry"],
                }
                for i, comp in enumerate(mech.components)
            ],
        },
    )
    print(f"allocation written to {out / 'allocation.json'}")
    return EXIT_OK


def _cmd_synthesize_wc(args) -> int:
    mech = load_mechanism(args.config)
    t1, t2 = al.worst_case_tolerances(mech)
    out = Path(args.out)
    _write_json(out / "worst_case.json", {"t1_mm": t1, "t2_mm": t2})
    for surf in mech.surfaces:
        dom = dm.component_domain(surf.geometry, surf.zones, t1, t2)
        _write_csv(
            out / f"domain_{surf.name}.csv",
            "tz,rx,ry",
            dom.vertices,
        )
    fr = dm.location_zone_domain(
        mech.fr_tolerance, mech.surface(mech.fr_surface).geometry
    )
    _write_csv(out / "domain_FR.csv", "tz,rx,ry", fr.vertices)
    print(f"t1 = {t1:.6g} mm, t2 = {t2:.6g} mm")
    return EXIT_OK


def _cmd_characterize(args) -> int:
    mesh = _mesh_from_args(args)
    basis = modal.build_basis(mesh, args.modes)
    files = []
    rho_rows = []
    for path in args.csv:
        field = modal.read_deviation_csv(path, mesh)
        sig = modal.signature(basis, field)
        entry = {
            "file": str(path),
            "coefficients_mm": [float(c) for c in sig.coeffs],
            "residue_mm": sig.residue,
        }
        curve = []
        for m_used in range(3, basis.mode_count + 1):
            r = modal.residue_with_modes(basis, field, m_used)
            curve.append(r)
            try:
                rho = modal.residue_ratio(basis, field, m_used)
            except modal.ZeroResidueError:
                rho = None
            rho_rows.append((path, m_used, r, rho))
        entry["residue_curve_mm"] = curve
        files.append(entry)
    out = Path(args.out)
    _write_json(
        out / "signatures.json",
        {
            "mesh": {"lx_mm": mesh.lx, "ly_mm": mesh.ly, "nx": mesh.nx, "ny": mesh.ny},
            "modes": basis.mode_count,
            "gram_condition": basis.gram_condition,
            "fields": files,
        },
    )
    lines = ["file,m_used,residue_mm,rho"]
    for path, m_used, r, rho in rho_rows:
        lines.append(f"{path},{m_used},{r!r},{'' if rho is None else repr(rho)}")
    _atomic_write(out / "rho_curves.csv", "\n".join(lines) + "\n")
    print(f"characterized {len(files)} field(s); reports in {out}")
    return EXIT_OK


def _cmd_batch_stats(args) -> int:
    mesh = _mesh_from_args(args)
    basis = modal.build_basis(mesh, args.modes)
    fields = [modal.read_deviation_csv(p, mesh) for p in args.csv]
    sigs = np.array([modal.signature(basis, f).coeffs for f in fields])
    batch = batch3d.empirical_signature_batch(sigs)
    mean_field = batch3d.mean_shape(basis, batch)
    var_field = batch3d.variance_shape(basis, batch)
    surf_inertia = batch3d.surface_inertia(mean_field, var_field)

    torsors = np.array(
        [
            [t.tz, t.rx, t.ry]
            for t in (
                modal.rigid_to_sdt(s[0], s[1], s[2], mesh) for s in sigs
            )
        ]
    )
    tb = batch3d.empirical_torsor_batch(torsors)
    adj_inertia = batch3d.adjusted_inertia(tb, SurfaceGeometry(mesh.lx, mesh.ly))
    out = Path(args.out)
    _write_csv(
        out / "mean_std_shape.csv",
        "x,y,mean,std",
        np.column_stack([mesh.nodes, mean_field, np.sqrt(var_field)]),
    )
    _write_json(
        out / "batch_stats.json",
        {
            "samples": len(fields),
            "surface_inertia_mm": surf_inertia,
            "adjusted_inertia_mm": adj_inertia,
            "mean_coefficients_mm": [float(c) for c in batch.mean_coeffs],
        },
    )
    print(
        f"surface inertia {surf_inertia:.6g} mm, adjusted inertia {adj_inertia:.6g} mm"
    )
    return EXIT_OK


def _scenario_from_args(args, mech, kind=None, cpi=None) -> sim.Scenario:
    return sim.Scenario(
        kind=kind or args.scenario,
        cpi=cpi if cpi is not None else args.cpi[0],
        assemblies=int(args.draws),
        repeats=args.repeats,
        seed=args.seed,
        offcentring_cap=args.cap,
        criterion=mech.simulation.criterion,
    )


def _cmd_simulate(args) -> int:
    mech = load_mechanism(args.config)
    tols = al.allocate(mech)
    report = sim.estimate_ncr(
        _scenario_from_args(args, mech), mech, tols, workers=args.workers
    )
    out = Path(args.out)
    _write_json(out / "simulation.json", report.to_dict())
    _write_csv(
        out / "ncr_histogram.csv",
        "bin_left,bin_right,count",
        [
            (report.histogram_edges[i], report.histogram_edges[i + 1], c)
            for i, c in enumerate(report.histogram_counts)
        ],
    )
    if args.svg:
        _render_histogram_svg(out, report)
    print(
        f"{report.scenario.kind} cpi={report.scenario.cpi}: "
        f"mean NCR {report.mean_ncr:.1f} ppm, worst {report.worst_ncr:.1f} ppm"
    )
    return EXIT_OK


def _render_histogram_svg(out: Path, report: sim.SimReport) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    edges = np.asarray(report.histogram_edges)
    ax.bar(
        edges[:-1],
        report.histogram_counts,
        width=np.diff(edges),
        align="edge",
        edgecolor="black",
        linewidth=0.5,
    )
    ax.set_xlabel("NCR per repeat (ppm)")
    ax.set_ylabel("repeats")
    ax.set_title(
        f"{report.scenario.kind}, cpi={report.scenario.cpi:g}, "
        f"cap={report.scenario.offcentring_cap:g}"
    )
    fig.tight_layout()
    fig.savefig(out / "ncr_histogram.svg")
    plt.close(fig)


def _cmd_table1(args) -> int:
    mech = load_mechanism(args.config)
    tols = al.allocate(mech)
    table = sim.run_table1(
        mech,
        tols,
        cpi_values=tuple(args.cpi),
        assemblies=int(args.draws),
        repeats=args.repeats,
        seed=args.seed,
        workers=args.workers,
    )
    out = Path(args.out)
    _write_json(out / "table1.json", table.to_dict())
    lines = ["scenario," + ",".join(f"cpi={c:g}" for c in table.cpi_values)]
    for label, reports in table.rows:
        lines.append(label + "," + ",".join(f"{r.mean_ncr:.1f}" for r in reports))
        lines.append(
            label + " (worst)," + ",".join(f"{r.worst_ncr:.1f}" for r in reports)
        )
    _atomic_write(out / "table1.csv", "\n".join(lines) + "\n")
    print(f"table written to {out / 'table1.json'}")
    return EXIT_OK


def _cmd_compare_wc(args) -> int:
    mech = load_mechanism(args.config)
    tols = al.allocate(mech)
    wc = al.worst_case_tolerances(mech)
    report = al.compare_to_worst_case(tols, wc, mech)
    out = Path(args.out)
    _write_json(out / "compare_wc.json", report.to_dict())
    for comp in report.components:
        cloud_inertial = al.fibonacci_ellipsoid(comp.inertial_semi_axes)
        cloud_wc = al.fibonacci_ellipsoid(comp.wc_half_widths)
        _write_csv(
            out / f"ellipsoid_inertial_c{comp.component}.csv",
            "tz,rx,ry",
            cloud_inertial,
        )
        _write_csv(out / f"ellipsoid_wc_c{comp.component}.csv", "tz,rx,ry", cloud_wc)
        surf = mech.surface(comp.surface)
        dom = dm.component_domain(surf.geometry, surf.zones, *wc)
        _write_csv(out / f"domain_wc_c{comp.component}.csv", "tz,rx,ry", dom.vertices)
    if args.svg:
        _render_compare_svg(out, report)
    print(f"homothety report in {out / 'compare_wc.json'}")
    return EXIT_OK


def _render_compare_svg(out: Path, report: al.HomothetyReport) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [f"c{c.component} ({c.surface})" for c in report.components]
    for k, axis in enumerate(al.AXES):
        ax.bar(
            np.arange(len(labels)) + 0.25 * k,
            [c.axis_ratios[axis] for c in report.components],
            width=0.25,
            label=axis,
        )
    ax.set_xticks(np.arange(len(labels)) + 0.25)
    ax.set_xticklabels(labels)
    ax.set_ylabel("3-sigma spread ratio (inertial / worst-case)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "compare_wc.svg")
    plt.close(fig)


def _add_modal_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lx", type=float, required=True, help="plane extent along x (mm)")
    p.add_argument("--ly", type=float, required=True, help="plane extent along y (mm)")
    p.add_argument("--nx", type=int, required=True, help="node count along x")
    p.add_argument("--ny", type=int, required=True, help="node count along y")
    p.add_argument("--modes", type=int, required=True, help="basis size (>= 3)")
    p.add_argument("--csv", nargs="+", required=True, help="deviation CSV files (x,y,dev)")


def _add_sim_args(p: argparse.ArgumentParser, multi_cpi: bool) -> None:
    p.add_argument(
        "--cpi",
        type=lambda s: [float(v) for v in s.split(",")],
        default=[1.0] if not multi_cpi else [1.0, 1.16, 1.33, 1.5],
        help="capability level(s), comma separated",
    )
    p.add_argument("--draws", type=float, default=1_000_000, help="assemblies per repeat")
    p.add_argument("--repeats", type=int, default=50, help="independent repeats")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--cap", type=float, default=1.0 / 3.0, help="off-centring cap")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inertol",
        description="Inertial statistical tolerancing of planar stack-ups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="allocate 3D inertial tolerances")
    p.add_argument("config")
    p.set_defaults(func=_cmd_allocate)

    p = sub.add_parser("synthesize-wc", help="worst-case (t1, t2) synthesis")
    p.add_argument("config")
    p.set_defaults(func=_cmd_synthesize_wc)

    p = sub.add_parser("characterize", help="modal signatures of deviation CSVs")
    _add_modal_args(p)
    p.set_defaults(func=_cmd_characterize)

    p = sub.add_parser("batch-stats", help="mean/std shapes and batch inertias")
    _add_modal_args(p)
    p.set_defaults(func=_cmd_batch_stats)

    p = sub.add_parser("simulate", help="Monte Carlo NCR for one scenario")
    p.add_argument("config")
    p.add_argument(
        "--scenario",
        choices=sim.SCENARIO_KINDS,
        default="centred-matched",
    )
    p.add_argument("--svg", action="store_true", help="also render a static SVG")
    _add_sim_args(p, multi_cpi=False)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("table1", help="NCR table over scenarios and cpi levels")
    p.add_argument("config")
    _add_sim_args(p, multi_cpi=True)
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("compare-wc", help="inertial vs worst-case homothety report")
    p.add_argument("config")
    p.add_argument("--svg", action="store_true", help="also render a static SVG")
    p.set_defaults(func=_cmd_compare_wc)

    for name, sp in sub.choices.items():
        sp.add_argument("-o", "--out", default="out", help="output directory")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        NotPositiveSemidefiniteError,
        dm.UnboundedDirectionError,
        dm.InfeasibleSynthesisError,
        modal.RankDeficientBasisError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
