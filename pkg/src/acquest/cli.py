"""Command-line entry point: simulate, compare, segment-map, discrete-gisa, serve.

Configuration precedence is flags > config file > defaults; every run writes
the fully-resolved configuration next to its outputs so re-running from that
echo reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datasets, gisa, simulation
from .choice import segment_map, write_segment_csv
from .designs import DesignSpaceError, load_design_space, load_partworths

DEFAULTS = {
    "strategy": "gisa",
    "theta": 100.0,
    "Q": 100,
    "T": 20,
    "J": 1000,
    "N": 100,
    "seed": 0,
    "space": "desk",
    "partworths": None,
    "competitor": "random",
    "out": "runs",
    "format": "csv",
}


def _resolve_space(name, rng=None):
    if name == "desk":
        return datasets.desk_scale_space(), datasets.desk_scale_partworths()
    if name == "dial":
        space = datasets.dial_scale_space(rng)
        return space, datasets.dial_scale_partworths(space)
    space = load_design_space(name, rng=rng)
    return space, None


def _merge_config(args: argparse.Namespace, keys) -> dict:
    config = {k: DEFAULTS[k] for k in keys}
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text())
        for k in keys:
            if k in loaded:
                config[k] = loaded[k]
    for k in keys:
        value = getattr(args, k, None)
        if value is not None:
            config[k] = value
    return config


def _validate_run_config(config: dict) -> None:
    checks = [
        (config["Q"] >= 0, "Q must be >= 0"),
        (config["T"] >= 1, "T must be >= 1"),
        (config["J"] >= 1, "J must be >= 1"),
        (config["N"] >= 2, "N must be >= 2"),
        (config["theta"] > 0, "theta must be > 0"),
        (config["format"] in ("csv", "json"), "format must be csv or json"),
    ]
    for ok, message in checks:
        if not ok:
            raise DesignSpaceError(message)


def _run_simulations(config: dict, strategies) -> simulation.ComparisonResult:
    space, bundled_w = _resolve_space(config["space"])
    if config["partworths"]:
        full = load_partworths(config["partworths"], space.schema)
        w_star = space.schema.constrain_partworths(full)
    elif bundled_w is not None:
        w_star = bundled_w
    else:
        raise DesignSpaceError("--partworths is required for a custom space file")
    competitor = config["competitor"]
    policy = "random" if competitor == "random" else int(competitor)
    model_factory = lambda run_seed: simulation.RespondentModel(w_star, config["theta"])
    if config["T"] == 1:
        # degenerate single run (compare proper requires T >= 2)
        root = np.random.SeedSequence(config["seed"])
        run_seed = int(root.spawn(1)[0].generate_state(1)[0])
        comp_rng = np.random.default_rng(np.random.SeedSequence(run_seed).spawn(1)[0])
        comp = int(comp_rng.integers(space.size)) if policy == "random" else policy
        market = space.with_competitor(comp).market()
        runs = [simulation.run_questionnaire(s, market, model_factory(run_seed),
                                             config["Q"], config["J"], config["N"],
                                             seed=run_seed, competitor_index=comp)
                for s in strategies]
        return simulation.ComparisonResult(runs, [])
    return simulation.compare_strategies(
        space, model_factory, config["Q"], config["T"], strategies,
        config["J"], config["N"], seed=config["seed"], competitor_policy=policy)


def _write_outputs(config: dict, result: simulation.ComparisonResult,
                   subcommand: str) -> None:
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    echo = {"subcommand": subcommand, **config}
    simulation.write_config_echo(out / "config.json", echo)
    if config["format"] == "csv":
        simulation.write_run_metrics_csv(out / "metrics.csv", result.runs)
        if result.aggregate:
            simulation.write_aggregate_csv(out / "aggregate.csv", result)
    else:
        rows = [{"strategy": r.strategy, "seed": r.seed,
                 "competitor": r.competitor_index, "true_optimum": r.true_optimum,
                 "rows": r.rows} for r in result.runs]
        (out / "metrics.json").write_text(json.dumps(rows, indent=2, sort_keys=True))
        if result.aggregate:
            (out / "aggregate.json").write_text(
                json.dumps(result.aggregate, indent=2, sort_keys=True))
    print(f"wrote {subcommand} outputs to {out}")


def _cmd_simulate(args) -> int:
    keys = tuple(DEFAULTS)
    config = _merge_config(args, keys)
    _validate_run_config(config)
    result = _run_simulations(config, (config["strategy"],))
    _write_outputs(config, result, "simulate")
    return 0


def _cmd_compare(args) -> int:
    keys = tuple(k for k in DEFAULTS if k != "strategy")
    config = _merge_config(args, keys)
    _validate_run_config(config)
    if config["T"] < 2:
        raise DesignSpaceError("compare needs T >= 2")
    result = _run_simulations(config, ("gisa", "abernethy"))
    _write_outputs(config, result, "compare")
    return 0


def _cmd_segment_map(args) -> int:
    space, _ = _resolve_space(args.space, rng=np.random.default_rng(args.seed or 0))
    if space.competitor is None:
        space = space.with_competitor(0)
    market = space.market()
    axis1, axis2, labels = segment_map(market, (args.bounds[0], args.bounds[1]),
                                       args.resolution)
    write_segment_csv(args.out, axis1, axis2, labels)
    print(f"wrote {args.resolution}x{args.resolution} segment map to {args.out}")
    return 0


def _cmd_discrete_gisa(args) -> int:
    instance = (gisa.load_discrete_instance(args.instance) if args.instance
                else datasets.heroes_instance())
    chosen, scores = gisa.select_discrete_query(instance)
    print("query scores:")
    for q, s in zip(instance.queries, scores):
        print(f"  {q}: left={s.left_prob:g} reduction={s.reduction_factor:g} "
              f"objective={s.objective:.6g}")
    print(f"root query: {instance.queries[chosen]}")
    result = gisa.discrete_gisa(instance)
    print(gisa.render_tree(instance, result.root), end="")
    print(f"expected queries: {result.expected_queries:g}")
    if result.unresolved_mass:
        print(f"unresolved mass: {result.unresolved_mass:g}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionConfig, create_app

    rng = np.random.default_rng(args.seed or 0)
    space, _ = _resolve_space(args.space, rng=rng)
    defaults = SessionConfig(strategy=args.strategy, budget=args.budget,
                             sample_size=args.J, candidate_size=args.N,
                             seed=args.seed or 0)
    app = create_app(space, persist_dir=args.persist_dir,
                     static_dir=args.static_dir, defaults=defaults)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acquest",
        description="adaptive choice questionnaires for profitable product design")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p, with_strategy: bool):
        if with_strategy:
            p.add_argument("--strategy", choices=("gisa", "abernethy"))
        p.add_argument("--theta", type=float)
        p.add_argument("--Q", type=int)
        p.add_argument("--T", type=int)
        p.add_argument("--J", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--space", help="path, or bundled names 'desk' / 'dial'")
        p.add_argument("--partworths", help="attribute,level,value CSV")
        p.add_argument("--competitor", help="'random' or a design position")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--config", help="JSON config file (flags override it)")

    p_sim = sub.add_parser("simulate", help="run one strategy on a simulated respondent")
    add_run_flags(p_sim, with_strategy=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="run both strategies and aggregate")
    add_run_flags(p_cmp, with_strategy=False)
    p_cmp.set_defaults(func=_cmd_compare)

    p_seg = sub.add_parser("segment-map", help="label a 2-D part-worth grid")
    p_seg.add_argument("--space", required=True)
    p_seg.add_argument("--bounds", nargs=2, type=float, default=(-10.0, 10.0))
    p_seg.add_argument("--resolution", type=int, default=200)
    p_seg.add_argument("--seed", type=int, default=0)
    p_seg.add_argument("--out", required=True)
    p_seg.set_defaults(func=_cmd_segment_map)

    p_dis = sub.add_parser("discrete-gisa", help="greedy tree on a discrete instance")
    p_dis.add_argument("--instance", help="instance JSON (default: bundled example)")
    p_dis.set_defaults(func=_cmd_discrete_gisa)

    p_srv = sub.add_parser("serve", help="run the live questionnaire service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--space", default="desk")
    p_srv.add_argument("--strategy", choices=("gisa", "abernethy"), default="gisa")
    p_srv.add_argument("--budget", type=int, default=20)
    p_srv.add_argument("--J", type=int, default=1000)
    p_srv.add_argument("--N", type=int, default=100)
    p_srv.add_argument("--seed", type=int, default=0)
    p_srv.add_argument("--persist-dir")
    p_srv.add_argument("--static-dir")
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DesignSpaceError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except Exception as exc:  # runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
