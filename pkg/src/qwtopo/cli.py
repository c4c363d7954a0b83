"""Command-line interface: ``qwtopo {walk,bands,refocus,cat,tomography}``.

Configuration is layered: subcommand defaults, then an optional preset,
then a JSON config file, then explicit flags.  Every run writes a
``*_manifest.json`` holding the fully resolved configuration.

Exit codes: 0 success, 1 usage or input error, 2 physics-invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import Cut, lattice_populations
from .bands import (
    band_scan,
    chiral_axis,
    dynamical_phase,
    refocus_step_search,
    topology_summary,
    winding_angle,
)
from .cavity import CavityState, run_cavity_walk, walker_to_cavity
from .config import PRESETS, ExperimentConfig
from .errors import ChiralSymmetryError, GapClosedError, PhysicsInvariantError
from .io import fmt, load_state, save_state, state_to_dict, write_csv, write_grid, write_json
from .lattice import BlochMode, WalkConfig, WalkerState, refocusing_overlap, run_walk
from .phasespace import GridSpec, husimi_q, sample_tomography, wigner
from .pipeline import cat_grid, run_cat_pair

NEAR_OPTIMAL = math.pi / 4  # |phi_d mod 2 pi| below this is flagged

COMMAND_DEFAULTS = {
    "walk": {},
    "bands": {},
    "refocus": {"bloch": "staggered"},
    "cat": {"bloch": "staggered", "layer": "cavity"},
    "tomography": {"layer": "cavity"},
}

# flag name -> config field
FLAG_FIELDS = {
    "theta1": float,
    "theta2": float,
    "sites": int,
    "steps": int,
    "bloch": str,
    "dk_total": float,
    "layer": str,
    "beta": float,
    "chi_mhz": float,
    "n_max": int,
    "partner_theta1": float,
    "partner_theta2": float,
    "band_samples": int,
    "max_search": int,
    "kind": str,
    "re_min": float,
    "re_max": float,
    "im_min": float,
    "im_max": float,
    "grid_n": int,
    "shots": int,
    "seed": int,
    "n_seeds": int,
    "cut_length": float,
    "cut_points": int,
    "output": str,
}

CHOICES = {
    "bloch": [m.value for m in BlochMode],
    "layer": ["lattice", "cavity"],
    "kind": ["Q", "W"],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="reference walk pair preset")
    common.add_argument("--figures", action="store_true", help="also render PNG figures")
    common.add_argument("--manifest", help="manifest path (default: <stem>_manifest.json in the output dir)")
    for name, typ in FLAG_FIELDS.items():
        common.add_argument(
            "--" + name.replace("_", "-"), dest=name, type=typ, default=None, choices=CHOICES.get(name)
        )
    parser = _Parser(prog="qwtopo", description="Split-step quantum walk topology simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("walk", parents=[common], help="populations per step").add_argument(
        "--save-state", help="write the final state to this JSON file"
    )
    sub.add_parser("bands", parents=[common], help="band structure and invariants")
    sub.add_parser("refocus", parents=[common], help="dynamical-phase search and Bloch refocusing")
    sub.add_parser("cat", parents=[common], help="cat-state Berry phase interferometry")
    tomo = sub.add_parser("tomography", parents=[common], help="Q or Wigner grid of a saved state")
    tomo.add_argument("state_file")
    return parser


def resolve_config(args) -> ExperimentConfig:
    data = dict(COMMAND_DEFAULTS[args.command])
    if args.preset:
        data.update(PRESETS[args.preset])
    if args.config:
        try:
            with open(args.config) as fh:
                file_data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if "preset" in file_data:
            data.update(PRESETS[file_data.pop("preset")])
        data.update(file_data)
    for name in FLAG_FIELDS:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    try:
        return ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc


def _stem(command: str, cfg: ExperimentConfig, args=None) -> str:
    if command == "tomography":
        return f"tomography_{Path(args.state_file).stem}_{cfg.kind}"
    return f"{command}_{cfg.theta1:g}_{cfg.theta2:g}"


def _walk_config(cfg: ExperimentConfig, bloch=None, angles=None) -> WalkConfig:
    t1, t2 = cfg.angles if angles is None else angles
    return WalkConfig(t1, t2, cfg.sites, cfg.steps, cfg.bloch if bloch is None else bloch, cfg.dk_total * math.pi)


def _overlap_rows(traj):
    if isinstance(traj[0], CavityState):
        ov = [traj[0].overlap(s) for s in traj]
    else:
        ov = [refocusing_overlap(traj[0], s) for s in traj]
    return [(abs(o) ** 2, float(np.angle(o)) / math.pi) for o in ov]


# -- subcommands ----------------------------------------------------------------------


def cmd_walk(cfg: ExperimentConfig, out: Path, args) -> list[Path]:
    stem = _stem("walk", cfg)
    wcfg = _walk_config(cfg)
    if cfg.layer == "lattice":
        traj = run_walk(wcfg)
        tables = [lattice_populations(s) for s in traj]
    else:
        traj = run_cavity_walk(wcfg, chi=cfg.chi, n_max=cfg.n_max, beta=cfg.beta)
        tables = [lattice_populations(s, cfg.sites, cfg.beta) for s in traj]
    m = cfg.sites
    cols = ["step"] + [f"P_up_{x}" for x in range(m)] + [f"P_down_{x}" for x in range(m)]
    rows = [[n] + list(t.p[0]) + list(t.p[1]) for n, t in enumerate(tables)]
    written = [
        write_csv(out / f"{stem}_populations.csv", cols, rows, {"layer": cfg.layer, "sites": m})
    ]
    overlaps = _overlap_rows(traj)
    written.append(
        write_json(
            out / f"{stem}_trajectory.json",
            {
                "layer": cfg.layer,
                "steps": [
                    {"step": n, "fidelity": f, "phase_over_pi": ph} for n, (f, ph) in enumerate(overlaps)
                ],
                "final_state": state_to_dict(traj[-1]),
            },
        )
    )
    if cfg.layer == "cavity":
        half = abs(cfg.beta) + 2.5
        spec = cfg.grid(GridSpec.square(half, cfg.grid_n))
        for n, state in enumerate(traj):
            q = husimi_q(state, spec, per_spin=True)
            al = spec.alphas.ravel()
            qrows = [
                (a.real, a.imag, u, d)
                for a, u, d in zip(al, q["up"].values.ravel(), q["down"].values.ravel())
            ]
            written.append(
                write_csv(
                    out / f"{stem}_q_step{n:02d}.csv",
                    ["re_alpha", "im_alpha", "Q_up", "Q_down"],
                    qrows,
                    {"kind": "Q", "step": n},
                )
            )
    if args.save_state:
        written.append(save_state(args.save_state, traj[-1]))
    if args.figures:
        from .plotting import plot_populations

        totals = np.array([t.site_totals() for t in tables])
        written.append(plot_populations(totals, out / f"{stem}_populations.png", stem))
    return written


def cmd_bands(cfg: ExperimentConfig, out: Path, args) -> list[Path]:
    stem = _stem("bands", cfg)
    t1, t2 = cfg.angles
    ks, eps, n = band_scan(t1, t2, cfg.band_samples)
    rows = [(k, e, *v) for k, e, v in zip(ks, eps, n)]
    written = [write_csv(out / f"{stem}.csv", ["k", "eps", "n_x", "n_y", "n_z"], rows)]
    summary = topology_summary(t1, t2, cfg.band_samples)
    data = {
        "theta1_over_pi": cfg.theta1,
        "theta2_over_pi": cfg.theta2,
        "topology": "defined" if summary.gapped else "undefined",
        "winding": summary.winding,
        "berry_upper": summary.berry_upper,
        "berry_lower": summary.berry_lower,
        "gap0": summary.gap0,
        "gap_pi": summary.gap_pi,
    }
    if summary.gapped:
        try:
            axis = chiral_axis(t1, t2)
            data["chiral_axis"] = axis.vector
            data["chiral_planarity"] = axis.planarity
            data["candidate_axis_matches"] = axis.matches
            data["winding_turns"] = winding_angle(t1, t2, cfg.band_samples)
        except (GapClosedError, ChiralSymmetryError) as exc:
            data["chiral_axis_error"] = str(exc)
    written.append(write_json(out / f"{stem}_topology.json", data))
    if args.figures:
        from .plotting import plot_bands

        written.append(plot_bands(ks, eps, n, out / f"{stem}.png", stem))
    return written


def cmd_refocus(cfg: ExperimentConfig, out: Path, args) -> list[Path]:
    stem = _stem("refocus", cfg)
    t1, t2 = cfg.angles
    search = refocus_step_search(t1, t2, cfg.max_search)
    rows = [(rank, n, r, r / (2 * math.pi), int(abs(r) < NEAR_OPTIMAL)) for rank, (n, r) in enumerate(search)]
    written = [
        write_csv(
            out / f"{stem}_search.csv",
            ["rank", "steps", "residual", "residual_cycles", "near_optimal"],
            rows,
            {"near_optimal_below": fmt(NEAR_OPTIMAL)},
        )
    ]
    bloch = cfg.bloch if cfg.bloch != "off" else "staggered"
    trace = _overlap_rows(run_walk(_walk_config(cfg, bloch)))
    control = _overlap_rows(run_walk(_walk_config(cfg, "off")))
    rows = [(n, f, p, cf, cp) for n, ((f, p), (cf, cp)) in enumerate(zip(trace, control))]
    written.append(
        write_csv(
            out / f"{stem}_fidelity.csv",
            ["step", "fidelity", "phase_over_pi", "control_fidelity", "control_phase_over_pi"],
            rows,
            {"bloch": bloch, "control": "off"},
        )
    )
    dyn = dynamical_phase(t1, t2, cfg.steps)
    written.append(
        write_json(
            out / f"{stem}_summary.json",
            {
                "steps": cfg.steps,
                "bloch": bloch,
                "final_fidelity": trace[-1][0],
                "final_phase_over_pi": trace[-1][1],
                "control_final_fidelity": control[-1][0],
                "dynamical_phase": dyn.value,
                "dynamical_residual": dyn.residual,
                "near_optimal_steps": sorted(n for n, r in search if abs(r) < NEAR_OPTIMAL),
            },
        )
    )
    if args.figures:
        from .plotting import plot_refocus

        written.append(
            plot_refocus(
                [r[0] for r in rows], [r[1] for r in rows], [r[3] for r in rows], out / f"{stem}.png", stem
            )
        )
    return written


def cmd_cat(cfg: ExperimentConfig, out: Path, args) -> list[Path]:
    if cfg.layer != "cavity":
        raise UsageError("cat runs on the cavity layer")
    stem = _stem("cat", cfg)
    spec = cfg.grid(cat_grid(cfg.beta, cfg.grid_n))
    cut = Cut(0, cfg.beta, cfg.cut_length, cfg.cut_points)
    seeds = tuple(range(cfg.seed, cfg.seed + cfg.n_seeds)) if cfg.shots else ()
    res = run_cat_pair(
        cfg.angles,
        cfg.partner_angles,
        cfg.sites,
        cfg.steps,
        cfg.bloch,
        cfg.beta,
        cfg.n_max,
        cfg.chi,
        spec,
        cut,
        cfg.shots,
        seeds,
    )
    written = [
        write_grid(out / f"{stem}_wigner_trivial.csv", res.trivial.grid),
        write_grid(out / f"{stem}_wigner_topological.csv", res.topological.grid),
    ]
    data = {
        "trivial": {"theta_over_pi": [a / math.pi for a in cfg.angles], **res.trivial.fit.as_dict(),
                    "direct_phase": res.trivial.direct_phase},
        "topological": {"theta_over_pi": [a / math.pi for a in cfg.partner_angles],
                        **res.topological.fit.as_dict(), "direct_phase": res.topological.direct_phase},
        "delta_phi": res.delta_phi,
        "delta_phi_over_pi": res.delta_phi_over_pi,
        "direct_delta_phi_over_pi": abs(res.direct_delta_phi) / math.pi,
    }
    if res.noisy:
        deltas = np.array([d for _, d in res.noisy])
        data["noisy"] = {
            "shots": cfg.shots,
            "seeds": [s for s, _ in res.noisy],
            "delta_phi": deltas,
            "spread_over_pi": float(np.ptp(deltas)) / math.pi,
        }
    written.append(write_json(out / f"{stem}_fringes.json", data))
    if args.figures:
        from .plotting import plot_grid

        written.append(plot_grid(res.trivial.grid, out / f"{stem}_wigner_trivial.png", "trivial"))
        written.append(plot_grid(res.topological.grid, out / f"{stem}_wigner_topological.png", "topological"))
    return written


def cmd_tomography(cfg: ExperimentConfig, out: Path, args) -> list[Path]:
    try:
        state = load_state(args.state_file)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if isinstance(state, WalkerState):
        state = walker_to_cavity(state.amplitudes, cfg.beta, cfg.n_max)
    half = abs(state.beta_ref) + 2.5
    spec = cfg.grid(GridSpec.square(half, cfg.grid_n))
    grid = wigner(state, spec) if cfg.kind == "W" else husimi_q(state, spec)
    if cfg.shots:
        grid = sample_tomography(grid, cfg.shots, cfg.seed)
    name = Path(args.state_file).stem
    stem = _stem("tomography", cfg, args)
    written = [write_grid(out / f"{stem}.csv", grid, {"state": name})]
    if args.figures:
        from .plotting import plot_grid

        written.append(plot_grid(grid, out / f"{stem}.png", name))
    return written


COMMANDS = {
    "walk": cmd_walk,
    "bands": cmd_bands,
    "refocus": cmd_refocus,
    "cat": cmd_cat,
    "tomography": cmd_tomography,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        out = cfg.output_dir()
        out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.command](cfg, out, args)
        manifest = Path(args.manifest or out / f"{_stem(args.command, cfg, args)}_manifest.json")
        write_json(
            manifest,
            {
                "command": args.command,
                "version": __version__,
                "config": cfg.to_dict(),
                "outputs": [p.name for p in written],
            },
        )
    except UsageError as exc:
        print(f"qwtopo: error: {exc}", file=sys.stderr)
        return 1
    except PhysicsInvariantError as exc:
        print(f"qwtopo: physics invariant violated: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"qwtopo: error: {exc}", file=sys.stderr)
        return 1
    for path in written + [manifest]:
        print(path)
    return 0


def main(argv=None):
    sys.exit(run(argv))
