"""Command-line entry point: scenario orchestration and artifact export.

Subcommands: thresholds, snapshot, route, train, eval, sweep.
Exit codes: 0 success, 2 config error, 3 infeasible scenario, 4 training
divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, default_config, parse_config
from .export import (
    export_graph_jsonl,
    route_record,
    thresholds_dict,
    write_json,
    write_manifest,
)
from .optics import InfeasibleLinkError, compute_thresholds, outage_curve
from .orbital import propagate_constellation, serving_satellite
from .rl.episode import run_episode
from .rl.policy import PolicyParams
from .rl.training import (
    TrainingDivergedError,
    build_snapshot_set,
    evaluate,
    train,
)
from .routing import shortest_path
from .scenario import (
    NoServingSatelliteError,
    ScenarioContext,
    prepare_scenario,
    scenario_graph,
)
from .seeding import substreams
from .topology import build_snapshot_graph, corridor_filter, sample_congestion

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4


def context_from_config(cfg: RunConfig) -> ScenarioContext:
    return prepare_scenario(
        cfg.constellation,
        cfg.optics,
        cfg.routing,
        cfg.gateway(cfg.scenario.source),
        cfg.gateway(cfg.scenario.dest),
        cfg.scenario.window_s,
        cfg.threshold_mode,
        cfg.fixed_divergence_rad,
    )


def route_scenario_records(
    cfg: RunConfig,
    seed: int,
    num_snapshots: int,
    p_busy: float | None = None,
    policy: PolicyParams | None = None,
) -> tuple[list[dict], list[dict]]:
    """Baseline (and optional policy) route records over seeded snapshots."""
    ctx = context_from_config(cfg)
    streams = substreams(seed)
    rng = np.random.default_rng(streams["snapshot"])
    congestion_seeds = streams["congestion"].spawn(num_snapshots)
    t0, t1 = ctx.window_s
    baseline_records: list[dict] = []
    policy_records: list[dict] = []
    for i in range(num_snapshots):
        t = float(rng.uniform(t0, t1))
        try:
            g = scenario_graph(ctx, t, congestion_seed=congestion_seeds[i], p_busy=p_busy)
        except NoServingSatelliteError as exc:
            record = {
                "t": t,
                "congestion_seed": i,
                "reached": False,
                "failure": str(exc),
            }
            baseline_records.append(record)
            if policy is not None:
                policy_records.append(dict(record))
            continue
        base = shortest_path(g, g.source_sat, g.dest_sat)
        baseline_records.append(
            route_record(
                g,
                base,
                ctx.constellation.earth_radius_m,
                ctx.src_gw_pos,
                ctx.dst_gw_pos,
                ctx.src_gw.name,
                ctx.dst_gw.name,
                ctx.routing.beta_s,
                i,
            )
        )
        if policy is not None:
            route, _ = run_episode(
                g,
                policy,
                g.source_sat,
                g.dest_sat,
                0.0,
                ctx.routing.h_max,
                np.random.default_rng(0),
                ctx.routing.k_cap,
            )
            rec = route_record(
                g,
                route,
                ctx.constellation.earth_radius_m,
                ctx.src_gw_pos,
                ctx.dst_gw_pos,
                ctx.src_gw.name,
                ctx.dst_gw.name,
                ctx.routing.beta_s,
                i,
            )
            if route.reached and base.reached and base.total_cost_s > 0:
                rec["stretch_vs_baseline"] = route.total_cost_s / base.total_cost_s
            policy_records.append(rec)
    return baseline_records, policy_records


def _route_summary(records: list[dict]) -> dict:
    delays = [r["end_to_end"]["delay_ms"] for r in records if r.get("reached")]
    hops = [r["end_to_end"]["hop_count"] for r in records if r.get("reached")]
    isl_delays = [r["isl_totals"]["cost_s"] * 1e3 for r in records if r.get("reached")]
    isl_hops = [r["isl_totals"]["hop_count"] for r in records if r.get("reached")]
    summary = {
        "snapshots": len(records),
        "successes": len(delays),
        "failures": len(records) - len(delays),
    }
    if delays:
        summary.update(
            {
                "median_delay_ms": float(np.median(delays)),
                "median_hops": float(np.median(hops)),
                "median_isl_delay_ms": float(np.median(isl_delays)),
                "median_isl_hops": float(np.median(isl_hops)),
            }
        )
    return summary


def sweep_rows(
    cfg: RunConfig,
    seed: int,
    sigmas_urad: list[float],
    num_snapshots: int,
    policy: PolicyParams | None = None,
) -> list[dict]:
    """Routing statistics per inter-plane jitter level.

    Uses the exact solver, or greedy rollouts of ``policy`` when given.
    Snapshots are paired across sigma levels (same times, same congestion
    draws); mean delay/hops are reported both over each level's own
    successes and over the subset feasible at every level, which is the
    apples-to-apples trend comparison.
    """
    per_sigma: dict[float, list[dict]] = {}
    thresholds_km: dict[float, float] = {}
    for sigma in sigmas_urad:
        optics = replace(cfg.optics, jitter_inter_rad=sigma * 1e-6)
        sweep_cfg = replace(cfg, optics=optics)
        baseline, policy_recs = route_scenario_records(
            sweep_cfg, seed, num_snapshots, policy=policy
        )
        per_sigma[sigma] = policy_recs if policy is not None else baseline
        ctx_thr = compute_thresholds(optics, cfg.threshold_mode, cfg.fixed_divergence_rad)
        thresholds_km[sigma] = ctx_thr.l_max_inter_m / 1e3

    common = None
    for records in per_sigma.values():
        feasible = {i for i, r in enumerate(records) if r.get("reached")}
        common = feasible if common is None else (common & feasible)
    common = common or set()

    rows = []
    for sigma in sigmas_urad:
        records = per_sigma[sigma]
        own = [r for r in records if r.get("reached")]
        shared = [records[i] for i in sorted(common)]
        rows.append(
            {
                "sigma_inter_urad": sigma,
                "l_max_inter_km": thresholds_km[sigma],
                "snapshots": len(records),
                "successes": len(own),
                "failures": len(records) - len(own),
                "success_rate": len(own) / len(records) if records else 0.0,
                "mean_delay_ms_common": (
                    float(np.mean([r["end_to_end"]["delay_ms"] for r in shared]))
                    if shared
                    else math.nan
                ),
                "mean_hops_common": (
                    float(np.mean([r["end_to_end"]["hop_count"] for r in shared]))
                    if shared
                    else math.nan
                ),
                "mean_delay_ms_success": (
                    float(np.mean([r["end_to_end"]["delay_ms"] for r in own]))
                    if own
                    else math.nan
                ),
                "mean_hops_success": (
                    float(np.mean([r["end_to_end"]["hop_count"] for r in own]))
                    if own
                    else math.nan
                ),
            }
        )
    return rows


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = replace(cfg, scenario=replace(cfg.scenario, seed=args.seed))
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_thresholds(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    thresholds = compute_thresholds(
        cfg.optics, cfg.threshold_mode, cfg.fixed_divergence_rad
    )
    payload = thresholds_dict(thresholds)
    payload["mode"] = cfg.threshold_mode
    write_json(out / "thresholds.json", payload)

    with (out / "outage_curves.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["link_class", "distance_km", "outage_probability"])
        for cls, sigma, theta, l_max in (
            ("intra", cfg.optics.jitter_intra_rad, thresholds.divergence_intra_rad, thresholds.l_max_intra_m),
            ("inter", cfg.optics.jitter_inter_rad, thresholds.divergence_inter_rad, thresholds.l_max_inter_m),
        ):
            distances = np.linspace(0.1 * l_max, 1.3 * l_max, 100)
            for d, p in zip(distances, outage_curve(cfg.optics, sigma, theta, distances)):
                writer.writerow([cls, repr(d / 1e3), repr(float(p))])

    write_manifest(
        out,
        "thresholds",
        cfg.effective_dict(),
        cfg.scenario.seed,
        thresholds=payload,
        artifacts=("thresholds.json", "outage_curves.csv"),
    )
    print(
        f"feasible ranges: intra {thresholds.l_max_intra_m / 1e3:.1f} km "
        f"(divergence {thresholds.divergence_intra_rad * 1e3:.4f} mrad), "
        f"inter {thresholds.l_max_inter_m / 1e3:.1f} km "
        f"(divergence {thresholds.divergence_inter_rad * 1e3:.4f} mrad)"
    )
    return EXIT_OK


def cmd_snapshot(cfg: RunConfig, num_snapshots: int) -> int:
    out = _out_dir(cfg)
    ctx = context_from_config(cfg)
    streams = substreams(cfg.scenario.seed)
    rng = np.random.default_rng(streams["snapshot"])
    congestion_seeds = streams["congestion"].spawn(num_snapshots)
    t0, t1 = ctx.window_s
    artifacts = []
    exported = 0
    for i in range(num_snapshots):
        t = float(rng.uniform(t0, t1))
        snap = propagate_constellation(ctx.constellation, t)
        src_sat = serving_satellite(snap, ctx.src_gw, ctx.routing.eps_min_rad)
        dst_sat = serving_satellite(snap, ctx.dst_gw, ctx.routing.eps_min_rad)
        if src_sat is None or dst_sat is None:
            print(f"snapshot {i}: no serving satellite, skipped", file=sys.stderr)
            continue
        nodes = None
        if ctx.routing.corridor_enabled:
            nodes = corridor_filter(
                snap,
                ctx.src_gw_pos,
                ctx.dst_gw_pos,
                ctx.routing.corridor_half_width_rad,
                force_include=(src_sat, dst_sat),
            )
        congestion = sample_congestion(
            ctx.routing.p_busy, snap, protected=(src_sat, dst_sat), seed=congestion_seeds[i]
        )
        graph = build_snapshot_graph(
            snap,
            ctx.thresholds,
            congestion,
            corridor_nodes=nodes,
            beta_s=ctx.routing.beta_s,
            source_sat=src_sat,
            dest_sat=dst_sat,
        )
        name = f"graph_{i:03d}.jsonl"
        export_graph_jsonl(out / name, snap, graph, congestion)
        artifacts.append(name)
        exported += 1
    write_manifest(
        out,
        "snapshot",
        cfg.effective_dict(),
        cfg.scenario.seed,
        thresholds=thresholds_dict(ctx.thresholds),
        artifacts=tuple(artifacts),
    )
    if exported == 0:
        print("no snapshot could be exported", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"exported {exported} snapshot graph(s) to {out}")
    return EXIT_OK


def _write_path_plot_csv(path: Path, labelled_records: list[tuple[str, list[dict]]]) -> None:
    """Per-hop geodetic waypoints of every route, for path plots."""
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snapshot", "solver", "hop", "sat", "lat_deg", "lon_deg", "alt_km"])
        for solver, records in labelled_records:
            for i, rec in enumerate(records):
                if "hops" not in rec:
                    continue
                src = rec["source_sat_geodetic"]
                writer.writerow(
                    [i, solver, 0, rec["source_sat"],
                     repr(src["lat_deg"]), repr(src["lon_deg"]), repr(src["alt_km"])]
                )
                for h, hop in enumerate(rec["hops"], start=1):
                    geo = hop["to_geodetic"]
                    writer.writerow(
                        [i, solver, h, hop["to"],
                         repr(geo["lat_deg"]), repr(geo["lon_deg"]), repr(geo["alt_km"])]
                    )


def cmd_route(cfg: RunConfig, num_snapshots: int, policy_path: str | None, baseline_only: bool) -> int:
    out = _out_dir(cfg)
    policy = None
    if policy_path and not baseline_only:
        policy, _ = PolicyParams.load(policy_path)
    baseline_records, policy_records = route_scenario_records(
        cfg, cfg.scenario.seed, num_snapshots, policy=policy
    )
    artifacts = ["routes.jsonl", "route_paths.csv", "summary.json"]
    with (out / "routes.jsonl").open("w") as fh:
        for record in baseline_records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    summary = {"baseline": _route_summary(baseline_records)}
    labelled = [("baseline", baseline_records)]
    if policy is not None:
        with (out / "policy_routes.jsonl").open("w") as fh:
            for record in policy_records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        summary["policy"] = _route_summary(policy_records)
        artifacts.append("policy_routes.jsonl")
        labelled.append(("policy", policy_records))
    _write_path_plot_csv(out / "route_paths.csv", labelled)
    write_json(out / "summary.json", summary)
    ctx = context_from_config(cfg)
    write_manifest(
        out,
        "route",
        cfg.effective_dict(),
        cfg.scenario.seed,
        thresholds=thresholds_dict(ctx.thresholds),
        artifacts=tuple(artifacts),
    )
    base = summary["baseline"]
    if base["successes"] == 0:
        print("no feasible route in any snapshot", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(
        f"baseline: {base['successes']}/{base['snapshots']} routed, "
        f"median delay {base['median_delay_ms']:.2f} ms, "
        f"median hops {base['median_hops']:.0f}"
    )
    return EXIT_OK


def cmd_train(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    ctx = context_from_config(cfg)
    params, log = train(ctx, cfg.rl, cfg.scenario.seed)
    params.save(out / "policy.npz", config_hash=cfg.config_hash())
    log.to_csv(out / "training_log.csv")
    write_manifest(
        out,
        "train",
        cfg.effective_dict(),
        cfg.scenario.seed,
        thresholds=thresholds_dict(ctx.thresholds),
        artifacts=("policy.npz", "training_log.csv"),
    )
    if log.rows:
        last = log.rows[-1]
        print(
            f"trained {cfg.rl.episodes} episodes: held-out success "
            f"{last.success_rate:.3f}, mean stretch {last.mean_stretch:.3f}"
        )
    return EXIT_OK


def cmd_eval(cfg: RunConfig, policy_path: str | None, num_snapshots: int) -> int:
    if not policy_path:
        raise ConfigError("eval requires --policy")
    out = _out_dir(cfg)
    policy, _ = PolicyParams.load(policy_path)
    ctx = context_from_config(cfg)
    streams = substreams(cfg.scenario.seed)
    graphs = build_snapshot_set(ctx, num_snapshots, streams["heldout"])
    report = evaluate(policy, graphs, ctx.routing.h_max, ctx.routing.k_cap)
    with (out / "eval.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t", "oracle_feasible", "reached", "stretch", "delay_ms", "hops", "intra", "inter"]
        )
        for row in report.rows:
            writer.writerow(
                [
                    repr(row.time_s),
                    int(row.oracle_feasible),
                    int(row.reached),
                    repr(row.stretch),
                    repr(row.delay_ms),
                    row.hops,
                    row.intra_count,
                    row.inter_count,
                ]
            )
    write_json(out / "eval_summary.json", report.summary())
    write_manifest(
        out,
        "eval",
        cfg.effective_dict(),
        cfg.scenario.seed,
        thresholds=thresholds_dict(ctx.thresholds),
        artifacts=("eval.csv", "eval_summary.json"),
    )
    if report.n_feasible == 0:
        print("no oracle-feasible snapshot in the evaluation set", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(
        f"eval: success {report.success_rate:.3f}, mean stretch "
        f"{report.mean_stretch:.3f} over {report.n_feasible} feasible snapshots"
    )
    return EXIT_OK


def cmd_sweep(
    cfg: RunConfig, sigmas_urad: list[float], num_snapshots: int, policy_path: str | None
) -> int:
    out = _out_dir(cfg)
    policy = PolicyParams.load(policy_path)[0] if policy_path else None
    rows = sweep_rows(cfg, cfg.scenario.seed, sigmas_urad, num_snapshots, policy=policy)
    fields = list(rows[0].keys())
    with (out / "sweep.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    write_manifest(
        out,
        "sweep",
        cfg.effective_dict(),
        cfg.scenario.seed,
        artifacts=("sweep.csv",),
    )
    for row in rows:
        print(
            f"sigma {row['sigma_inter_urad']:.0f} urad: range {row['l_max_inter_km']:.0f} km, "
            f"success {row['successes']}/{row['snapshots']}, "
            f"mean delay {row['mean_delay_ms_common']:.2f} ms, "
            f"mean hops {row['mean_hops_common']:.2f} (common subset)"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optisl",
        description="Optical LEO ISL routing simulator: thresholds, snapshot graphs, routing, policy training.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("thresholds", "derive per-class feasible ISL ranges"),
        ("snapshot", "export feasibility-filtered snapshot graphs"),
        ("route", "route gateway-to-gateway over seeded snapshots"),
        ("train", "train the next-hop policy"),
        ("eval", "evaluate a trained policy against the exact solver"),
        ("sweep", "jitter sweep of routing statistics"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML run configuration (defaults apply if omitted)")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--out", help="output directory (overrides config)")
        if name in ("route", "eval", "sweep"):
            p.add_argument("--policy", help="trained policy file (.npz)")
        if name in ("snapshot", "route", "sweep", "eval"):
            p.add_argument("--snapshots", type=int, help="number of snapshots")
        if name == "route":
            p.add_argument(
                "--baseline-only",
                action="store_true",
                help="skip policy rollouts even when --policy is given",
            )
        if name == "sweep":
            p.add_argument(
                "--sigmas-urad",
                default="150,200,300",
                help="comma-separated inter-plane jitter levels in microradians",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        num_snapshots = getattr(args, "snapshots", None) or cfg.scenario.num_snapshots
        if args.command == "thresholds":
            return cmd_thresholds(cfg)
        if args.command == "snapshot":
            return cmd_snapshot(cfg, num_snapshots)
        if args.command == "route":
            return cmd_route(cfg, num_snapshots, args.policy, args.baseline_only)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "eval":
            return cmd_eval(cfg, args.policy, num_snapshots)
        if args.command == "sweep":
            sigmas = [float(s) for s in args.sigmas_urad.split(",") if s.strip()]
            if not sigmas:
                raise ConfigError("--sigmas-urad must name at least one jitter level")
            return cmd_sweep(cfg, sigmas, num_snapshots, args.policy)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleLinkError as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except TrainingDivergedError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
