"""Command-line front end.

Subcommands: fields, charges, verify, simulate. Every run takes one scenario
JSON file, writes deterministic data files into --out and echoes the scenario
back for reproduction. Exit codes: 0 success, 1 config error, 2 verification
failure, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .defects import (
    EDGE,
    SCREW,
    axial_vector,
    build_coframe,
    build_connection,
    burgers_vector,
    curvature,
    frank_angles,
    torsion,
)
from .dynamics import magnus_force, step_lines, transversality_defect
from .field_theory import (
    bianchi_residuals,
    el_coframe_residual,
    el_connection_residual,
    embed_static_4d,
    u1_sources,
)
from .forms import identity_coframe, integrate_loop
from .geometry import Circle, Disk
from .io import write_csv, write_field
from .network import charge_ledger, detect_and_reconnect
from .scenario import Scenario, ScenarioError, load_scenario, scenario_to_doc

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY = 2
EXIT_RUNTIME = 3


def _json_dump(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _prepare_out(out_dir, scenario: Scenario, args):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write-probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise ScenarioError(f"output directory not writable: {err}") from err
    _json_dump(out / "scenario.json", scenario_to_doc(scenario))
    meta = {
        "version": __version__,
        "command": args.command,
        "resolutionScale": args.resolution_scale,
        "seed": args.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    _json_dump(out / "meta.json", meta)
    return out


def _measuring_radius(scenario: Scenario, grid, around=None):
    """Transverse disk radius clear of the boundary and of other cores."""
    best = None
    for d in scenario.defects:
        if around is not None and d.position != around.position:
            continue
        dist = min(min(d.position[i] - grid.extents[i][0],
                       grid.extents[i][1] - d.position[i]) for i in range(2))
        best = dist if best is None else min(best, dist)
    if best is None:
        best = 0.5 * min(hi - lo for lo, hi in grid.extents[:2])
    radius = 0.8 * best
    if around is not None:
        for d in scenario.defects:
            if d.position == around.position:
                continue
            gap = np.hypot(d.position[0] - around.position[0],
                           d.position[1] - around.position[1])
            radius = min(radius, 0.6 * gap)
    return radius


def _mid_z(grid):
    lo, hi = grid.extents[2]
    return 0.5 * (lo + hi)


def cmd_fields(scenario: Scenario, out: Path, scale: int) -> int:
    config = scenario.configuration(scale)
    grid = config.grid
    e = build_coframe(config)
    omega = build_connection(config)
    t = torsion(e, omega)
    r = curvature(omega)
    perturbation = e - identity_coframe(grid)
    for name, field in (("coframe", e), ("coframe_perturbation", perturbation),
                        ("connection", omega), ("torsion", t),
                        ("curvature", r)):
        write_field(out / f"{name}.field", field)
        write_csv(out / f"{name}.csv", field)
    if scenario.defects:
        _write_ray_profile(out / "profile_ray.csv", perturbation, scenario,
                           grid)
    return EXIT_OK


def _write_ray_profile(path, perturbation, scenario, grid):
    """Perturbation magnitude along an +x ray from the first core (decay data)."""
    d = scenario.defects[0]
    rmax = _measuring_radius(scenario, grid)
    radii = np.linspace(2 * d.core_radius, rmax, 256)
    pts = np.zeros((len(radii), 3))
    pts[:, 0] = d.position[0] + radii
    pts[:, 1] = d.position[1]
    pts[:, 2] = _mid_z(grid)
    vals = perturbation.sample(pts, order=3)
    mag = np.sqrt(np.sum(vals * vals, axis=(0, 1)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r,perturbation_mag,r_times_mag\n")
        for rr, m in zip(radii, mag):
            fh.write(f"{rr:.17g},{m:.17g},{rr * m:.17g}\n")


def cmd_charges(scenario: Scenario, out: Path, scale: int) -> int:
    config = scenario.configuration(scale)
    grid = config.grid
    e = build_coframe(config)
    omega = build_connection(config)
    t = torsion(e, omega)
    r = curvature(omega)
    zmid = _mid_z(grid)
    records = []
    for d in scenario.defects:
        radius = _measuring_radius(scenario, grid, around=d)
        center = (d.position[0], d.position[1], zmid)
        disk = Disk(center, radius)
        b = burgers_vector(t, disk)
        frank = frank_angles(r, disk)
        # keep the loop clear of the boundary interpolation fringe
        holonomy = integrate_loop(e, Circle(center, 0.75 * radius))
        records.append({
            "kind": d.kind,
            "position": list(d.position),
            "charge": d.charge,
            "measuringRadius": radius,
            "burgers": [float(v) for v in b],
            "frankAxial": [float(v) for v in axial_vector(frank)],
            "loopHolonomy": [float(v) for v in holonomy],
        })
    _json_dump(out / "charges.json", {"scenario": scenario.name,
                                      "defects": records})
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

MACHINE_ZERO = 1e-10
RATIO_BAND = (3.0, 5.0)


def _ratio_check(name, coarse, fine, band=RATIO_BAND, floor=MACHINE_ZERO):
    if coarse <= floor and fine <= floor:
        return {"name": name, "passed": True, "coarse": coarse, "fine": fine,
                "classification": "exactly conserved (machine zero)"}
    ratio = coarse / fine if fine > 0 else float("inf")
    return {"name": name, "passed": bool(band[0] <= ratio <= band[1]),
            "coarse": coarse, "fine": fine, "ratio": ratio,
            "classification": "second-order convergence"}


def cmd_verify(scenario: Scenario, out: Path, scale: int) -> int:
    checks = []
    warnings = []
    grid = scenario.configuration(scale).grid
    if min(grid.resolution) < 8:
        warnings.append("grid resolution below 8 on some axis: quadrature "
                        "and stencils are underresolved")
    for i, d in enumerate(scenario.defects):
        if d.core_radius < 2 * max(grid.spacing[:2]):
            warnings.append(f"defect {i}: core radius {d.core_radius} below "
                            "two transverse cells; charges will be inaccurate")

    residual_records = []

    def record(res, term, config):
        rec = res.as_record(term)
        rec["resolution"] = list(config.grid.resolution)
        rec["coreRadius"] = [d.core_radius for d in scenario.defects]
        rec["couplings"] = {"alpha": scenario.couplings.alpha,
                            "beta": scenario.couplings.beta,
                            "gamma": scenario.couplings.gamma}
        residual_records.append(rec)

    if min(grid.resolution) >= 16:
        norms = {}
        for factor, tag in ((scale, "coarse"), (2 * scale, "fine")):
            config = scenario.configuration(factor)
            e = build_coframe(config)
            omega = build_connection(config)
            margin = [3.0 * h for h in grid.spacing]  # fixed by the base grid
            tubes = [(d.position[0], d.position[1], 5 * d.core_radius)
                     for d in scenario.defects]
            dr, dte = bianchi_residuals(e, omega, boundary_margin=margin,
                                        exclude_tubes=tubes)
            record(dr, f"DR ({tag})", config)
            record(dte, f"DT - R^e ({tag})", config)
            norms[(tag, "DR")] = dr.l2
            norms[(tag, "DT-Re")] = dte.l2
            del dr, dte

        checks.append(_ratio_check("bianchi DR interior convergence",
                                   norms[("coarse", "DR")],
                                   norms[("fine", "DR")]))
        checks.append(_ratio_check("bianchi DT - R^e interior convergence",
                                   norms[("coarse", "DT-Re")],
                                   norms[("fine", "DT-Re")]))
    else:
        warnings.append("grid too coarse for the refinement diagnostic; "
                        "conservation-law convergence skipped")

    config = scenario.configuration(scale)
    g = config.grid
    e = build_coframe(config)
    omega = build_connection(config)
    t = torsion(e, omega)
    r = curvature(omega)
    zmid = _mid_z(g)
    for i, d in enumerate(scenario.defects):
        radius = _measuring_radius(scenario, g, around=d)
        center = (d.position[0], d.position[1], zmid)
        if d.kind in (SCREW, EDGE):
            b = burgers_vector(t, Disk(center, radius))
            if d.kind == SCREW:
                expected = np.array([0.0, 0.0, d.charge])
            else:
                expected = d.charge * np.array([d.burgers_direction[0],
                                                d.burgers_direction[1], 0.0])
            # project onto the defect's own Burgers axis: transverse
            # components of the disk flux pick up long-range torsion tails
            # of other enclosed-tail defects by construction
            bhat = expected / np.linalg.norm(expected)
            err = abs(float(np.dot(b, bhat)) - d.charge) / abs(d.charge)
            checks.append({"name": f"defect {i} ({d.kind}) Burgers charge "
                                   "(projected)",
                           "passed": bool(err < 1e-3), "relativeError": err,
                           "measured": [float(v) for v in b]})
            rmin = 6.0 * d.core_radius
            if rmin >= 0.9 * radius:
                warnings.append(f"defect {i}: no loop radius clears six core "
                                "radii; holonomy check skipped")
            else:
                radii = list(np.linspace(max(rmin, 0.3 * radius),
                                         0.9 * radius, 3))
                hols = [integrate_loop(e, Circle(center, rr)) for rr in radii]
                dev = float(max(np.max(np.abs(h - expected)) for h in hols))
                checks.append({"name": f"defect {i} ({d.kind}) loop holonomy "
                                       "equals Burgers, radius independent",
                               "passed": bool(dev < 1e-6
                                              * max(1.0, abs(d.charge))),
                               "maxDeviation": dev,
                               "radii": radii})
        else:
            frank = axial_vector(frank_angles(r, Disk(center, radius)))
            expected = 2 * np.pi * d.charge
            err = abs(frank[2] - expected) / max(abs(expected), 1e-30)
            checks.append({"name": f"defect {i} (wedge) Frank charge",
                           "passed": bool(err < 1e-3), "relativeError": err,
                           "measured": [float(v) for v in frank]})

    if not scenario.defects:
        e4, om4 = embed_static_4d(e, omega)
        res_e = el_coframe_residual(e4, om4, scenario.couplings)
        res_o = el_connection_residual(e4, om4, scenario.couplings)
        record(res_e, "D(*T) + Gamma R^e", config)
        record(res_o, "D(*R) + kappa (e^*T - e^*T)", config)
        checks.append({"name": "defect-free force balance residual is zero",
                       "passed": bool(res_e.l2 == 0.0 and res_e.linf == 0.0),
                       "l2": res_e.l2, "max": res_e.linf})
        checks.append({"name": "defect-free spin balance residual is zero",
                       "passed": bool(res_o.l2 == 0.0 and res_o.linf == 0.0),
                       "l2": res_o.l2, "max": res_o.linf})

    srcs = u1_sources(e, omega, scenario.couplings)
    checks.append({"name": "U(1) source J2 identically zero in 3D",
                   "passed": bool(srcs.j2_identically_zero),
                   "dJ1Norm": srcs.dj1.l2})

    passed = all(c["passed"] for c in checks)
    report = {"scenario": scenario.name, "resolutionScale": scale,
              "passed": bool(passed), "checks": checks,
              "residuals": residual_records, "warnings": warnings}
    _json_dump(out / "verify_report.json", report)
    for c in checks:
        print(("PASS" if c["passed"] else "FAIL"), c["name"])
    for w in warnings:
        print("WARN", w)
    return EXIT_OK if passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(scenario: Scenario, out: Path, scale: int) -> int:
    if scenario.dynamics is None:
        raise ScenarioError("$.dynamics: missing (required by simulate)")
    config = scenario.configuration(scale)
    grid = config.grid
    e = build_coframe(config)
    omega = build_connection(config)
    r = curvature(omega)
    disc = scenario.disclination_field()
    params = scenario.dynamics

    lines = list(scenario.lines)
    initial_ledger = charge_ledger(lines, [])
    all_events = []
    rows = []
    current = lines
    one = type(params)(Gamma=params.Gamma, time_step=params.time_step,
                       steps=1, force_law=params.force_law,
                       external_force=params.external_force)
    for step in range(params.steps):
        current, diags, _clips = step_lines(current, disc, one, grid.extents)
        for d in diags:
            rows.append((step, d.line_id, d.node, *d.position, *d.velocity,
                         *d.f_ext, *d.f_magnus, d.transversality))
        if scenario.reconnection_threshold is not None:
            current, events = detect_and_reconnect(
                current, scenario.reconnection_threshold, r, e, step=step)
            all_events.extend(events)

    with open(out / "trajectory.csv", "w", encoding="utf-8") as fh:
        fh.write("step,line_id,node,px,py,pz,vx,vy,vz,"
                 "fx_ext,fy_ext,fz_ext,fx_mag,fy_mag,fz_mag,transversality\n")
        for row in rows:
            fh.write(",".join(
                str(v) if isinstance(v, (int, str)) else f"{v:.17g}"
                for v in row) + "\n")

    with open(out / "events.jsonl", "w", encoding="utf-8") as fh:
        for ev in all_events:
            fh.write(json.dumps(ev.as_record(), sort_keys=True) + "\n")

    final_ledger = charge_ledger(current, all_events)
    _json_dump(out / "network_final.json", {
        "lines": [{"id": l.id, "burgers": [float(v) for v in l.burgers],
                   "nodes": [[float(x) for x in nd] for nd in l.nodes],
                   "closed": l.closed} for l in current],
        "eventCount": len(all_events),
        "ledgerInitial": [float(v) for v in initial_ledger],
        "ledgerFinal": [float(v) for v in final_ledger],
        "ledgerDrift": float(np.max(np.abs(final_ledger - initial_ledger))),
    })

    _write_transversality_map(out / "fig_transversality.csv", scenario, disc)
    return EXIT_OK


def _write_transversality_map(path, scenario: Scenario, disc):
    """|F . v| over 64 in-plane velocity directions at the first line node."""
    if not scenario.lines:
        return
    line = scenario.lines[0]
    theta = disc.theta_at(line.nodes[:1])[0]
    b = np.asarray(line.burgers, float)
    params = scenario.dynamics
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("phi,vx,vy,vz,fx,fy,fz,f_dot_v_abs,transversality\n")
        for k in range(64):
            phi = 2 * np.pi * k / 64
            v = np.array([np.cos(phi), np.sin(phi), 0.0])
            f = magnus_force(theta, b, v, params.Gamma, params.force_law,
                             tangent=np.array([0.0, 0.0, 1.0]))
            fdotv = float(abs(np.dot(f, v)))
            fh.write(",".join(f"{x:.17g}" for x in
                              (phi, *v, *f, fdotv,
                               transversality_defect(f, v))) + "\n")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="defectgeom",
        description="Defect-geometry engine: canonical dislocation and "
                    "disclination fields, charge extraction, conservation "
                    "diagnostics and line dynamics.")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--resolution-scale", type=int, default=1,
                        metavar="K", help="multiply all grid resolutions")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; all computation is deterministic")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("fields", "serialize defect fields and CSV exports"),
                      ("charges", "extract Burgers/Frank charges"),
                      ("verify", "run residual and convergence diagnostics"),
                      ("simulate", "run line dynamics and reconnection")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("scenario", help="scenario JSON file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.resolution_scale < 1:
        print("error: --resolution-scale must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scenario = load_scenario(args.scenario)
        out = _prepare_out(args.out, scenario, args)
    except ScenarioError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "fields":
            return cmd_fields(scenario, out, args.resolution_scale)
        if args.command == "charges":
            return cmd_charges(scenario, out, args.resolution_scale)
        if args.command == "verify":
            return cmd_verify(scenario, out, args.resolution_scale)
        if args.command == "simulate":
            return cmd_simulate(scenario, out, args.resolution_scale)
        raise RuntimeError(f"unhandled command {args.command}")
    except ScenarioError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # noqa: BLE001 - map to documented exit code
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
