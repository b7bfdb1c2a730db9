"""Command-line harness.

Commands: plan, simulate, embed, evaluate, sweep-dims, ingest-ekman,
serve.  All commands are deterministic given --seed.  Exit codes:
0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import ekman, evaluate, simulate
from .model import (
    DataError,
    EngineConfig,
    Triplet,
    TripletResponse,
    read_responses_csv,
    answered,
)
from .mlds import fit_mlds
from .scaling import (
    ScalingFunctionSpec,
    enumerate_universe,
    nmds_sort_budget,
    triplet_budget,
)
from .ste import fit_ste, fit_tste

USAGE_ERROR = 1
DATA_ERROR = 2


def _fail_usage(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return USAGE_ERROR


def _fail_data(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return DATA_ERROR


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config_file(args) -> dict:
    if not args.config:
        return {}
    with open(args.config) as fh:
        return json.load(fh)


def _spec_from_obj(obj) -> ScalingFunctionSpec:
    if isinstance(obj, str):
        if obj.endswith(".json"):
            return ekman.read_table_json(obj)
        return ScalingFunctionSpec(kind=obj)
    table = obj.get("table")
    if table is not None:
        table = {float(k): tuple(v) for k, v in table.items()}
    return ScalingFunctionSpec(kind=obj["kind"], params=obj.get("params", {}), table=table)


def cmd_plan(args) -> int:
    base, doubled = triplet_budget(args.n, args.d)
    sort_budget = nmds_sort_budget(args.n)
    trios = math.comb(args.n, 3)
    print(f"stimuli (n):                      {args.n}")
    print(f"embedding dimension (d):          {args.d}")
    print(f"monotone-valid triplet universe:  {trios}")
    print(f"general triplet universe:         {3 * trios}")
    print(f"suggested budget d*n*log2(n):     {base}")
    print(f"doubled budget:                   {doubled}")
    print(f"full distance sort (NMDS route):  {sort_budget}")
    return 0


def cmd_simulate(args) -> int:
    file_cfg = _load_config_file(args)
    spec_obj = args.spec if args.spec else file_cfg.get("spec", "sigmoid")
    cfg = simulate.SweepConfig(
        spec=_spec_from_obj(spec_obj),
        n=args.n if args.n is not None else file_cfg.get("n", 10),
        sigma_list=tuple(args.sigma) if args.sigma else tuple(file_cfg.get("sigma_list", simulate.DEFAULT_SIGMAS)),
        r_list=tuple(args.r) if args.r else tuple(file_cfg.get("r_list", simulate.DEFAULT_RS)),
        engines=tuple(args.engines) if args.engines else tuple(file_cfg.get("engines", simulate.ALL_ENGINES)),
        repetitions=args.repetitions if args.repetitions is not None else file_cfg.get("repetitions", 10),
        restarts=args.restarts if args.restarts is not None else file_cfg.get("restarts", 10),
        seed=args.seed if args.seed is not None else file_cfg.get("seed", 0),
    )
    skipped = [e for e in cfg.engines if e == "nmds" and any(r != 1.0 for r in cfg.r_list)]
    if skipped:
        print("warning: nmds runs only at r=1; other r values skipped", file=sys.stderr)
    rows = simulate.run_sweep(cfg, jobs=args.jobs)
    mean_rows, std_rows = simulate.aggregate(rows)
    out = _out_dir(args)
    (out / "mean.csv").write_text(simulate.table_to_csv(mean_rows))
    (out / "std.csv").write_text(simulate.table_to_csv(std_rows))
    (out / "raw.csv").write_text(simulate.rows_to_csv(rows))
    if args.stdout:
        sys.stdout.write(simulate.table_to_csv(mean_rows))
    print(f"wrote {out / 'mean.csv'}, {out / 'std.csv'}, {out / 'raw.csv'}", file=sys.stderr)
    return 0


def _engine_config(args, dim: int) -> EngineConfig:
    return EngineConfig(
        dim=dim,
        restarts=args.restarts if args.restarts is not None else 10,
        seed=args.seed if args.seed is not None else 0,
    )


def _map_degree_labels(responses):
    """Accept raw per-subject files keyed by stimulus degree (0..70 in
    steps of 10) by remapping the labels to indices 0..7."""
    values = {v for r in responses for v in (r.triplet.ref, r.triplet.opt1, r.triplet.opt2)}
    if values and values <= {0, 10, 20, 30, 40, 50, 60, 70} and max(values) >= 10:
        return [
            TripletResponse(
                triplet=Triplet(r.triplet.ref // 10, r.triplet.opt1 // 10, r.triplet.opt2 // 10),
                answer=r.answer,
                rt_ms=r.rt_ms,
                session_id=r.session_id,
                repeat_index=r.repeat_index,
            )
            for r in responses
        ]
    return responses


def _read_responses(path):
    return _map_degree_labels(read_responses_csv(path))


def cmd_embed(args) -> int:
    responses = answered(_read_responses(args.responses))
    if not responses:
        raise DataError("no answered responses in input")
    config = _engine_config(args, args.dim)
    if args.engine == "mlds":
        scale = fit_mlds(responses, config)
        embedding = scale.to_embedding()
        extra = {"sigma_hat": scale.sigma_hat, "loglik": scale.loglik}
    elif args.engine in ("ste", "tste"):
        fit = fit_ste if args.engine == "ste" else fit_tste
        embedding = fit(responses, config)
        extra = {}
    else:
        return _fail_usage(f"unknown engine {args.engine!r}")
    out = _out_dir(args)
    (out / "embedding.json").write_text(embedding.to_json() + "\n")
    report = {
        "engine": args.engine,
        "final_objective": embedding.meta.get("final_objective"),
        "restart_objectives": embedding.meta.get("restart_objectives", []),
        "chosen_restart": embedding.meta.get("chosen_restart"),
        "train_triplet_error": embedding.meta.get("train_triplet_error"),
        **extra,
    }
    (out / "fit_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.stdout:
        sys.stdout.write(embedding.to_json() + "\n")
    print(f"wrote {out / 'embedding.json'}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    responses = answered(_read_responses(args.responses))
    config = _engine_config(args, args.dim)
    report = evaluate.cross_validated_triplet_error(
        responses, args.engine, config, k=args.k, seed=config.seed
    )
    out = _out_dir(args)
    (out / "cv_report.json").write_text(report.to_json() + "\n")
    print(f"{args.engine} d={args.dim} k={args.k}: "
          f"{report.mean:.4f} +/- {report.std:.4f}", file=sys.stderr)
    if args.stdout:
        sys.stdout.write(report.to_json() + "\n")
    return 0


def cmd_sweep_dims(args) -> int:
    if args.dmin > args.dmax:
        return _fail_usage("dmin must be <= dmax")
    responses = answered(_read_responses(args.responses))
    config = _engine_config(args, 1)
    sweep = evaluate.dimension_sweep(
        responses,
        engines=args.engines,
        dims=range(args.dmin, args.dmax + 1),
        config=config,
        k=args.k,
        seed=config.seed,
    )
    out = _out_dir(args)
    (out / "sweep.json").write_text(sweep.to_json() + "\n")
    (out / "sweep.csv").write_text(evaluate.sweep_to_csv(sweep))
    for engine, dim in sweep.not_applicable:
        print(f"note: {engine} not applicable at d={dim}", file=sys.stderr)
    if args.stdout:
        sys.stdout.write(sweep.to_json() + "\n")
    print(f"wrote {out / 'sweep.json'}", file=sys.stderr)
    return 0


def cmd_ingest_ekman(args) -> int:
    path = args.similarity or str(ekman.bundled_similarity_path())
    config = EngineConfig(
        dim=2,
        restarts=args.restarts if args.restarts is not None else 10,
        seed=args.seed if args.seed is not None else 0,
    )
    spec = ekman.ingest_similarity(path, config)
    out = _out_dir(args)
    target = out / "color_ground_truth.json"
    ekman.write_table_json(spec, target)
    if args.stdout:
        sys.stdout.write(spec.to_json() + "\n")
    print(f"wrote {target}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=Path(args.out_dir), assets_dir=args.assets)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triadscale")
    parser.add_argument("--seed", type=int, default=None, help="master RNG seed")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--stdout", action="store_true", help="echo primary output to stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="triplet budget summary")
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run a simulation sweep")
    p.add_argument("--spec", default=None, help="scaling function kind or table JSON path")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--sigma", type=float, nargs="+", default=None)
    p.add_argument("--r", type=float, nargs="+", default=None)
    p.add_argument("--engines", nargs="+", default=None, choices=simulate.ALL_ENGINES)
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("embed", help="fit one engine on a response file")
    p.add_argument("responses")
    p.add_argument("--engine", required=True, choices=("ste", "tste", "mlds"))
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--restarts", type=int, default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("evaluate", help="cross-validated triplet error")
    p.add_argument("responses")
    p.add_argument("--engine", required=True, choices=("ste", "tste", "mlds"))
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--restarts", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep-dims", help="dimension sweep of CV error")
    p.add_argument("responses")
    p.add_argument("--engines", nargs="+", default=["tste"], choices=("ste", "tste", "mlds"))
    p.add_argument("--dmin", type=int, default=1)
    p.add_argument("--dmax", type=int, default=8)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--restarts", type=int, default=None)
    p.set_defaults(func=cmd_sweep_dims)

    p = sub.add_parser("ingest-ekman", help="freeze 2-D color ground truth from a similarity CSV")
    p.add_argument("similarity", nargs="?", default=None,
                   help="similarity matrix CSV (default: bundled color data)")
    p.add_argument("--restarts", type=int, default=None)
    p.set_defaults(func=cmd_ingest_ekman)

    p = sub.add_parser("serve", help="run the live collection service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--assets", default=None, help="static stimulus asset directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail_data(str(exc))
    except DataError as exc:
        return _fail_data(str(exc))


if __name__ == "__main__":
    sys.exit(main())
