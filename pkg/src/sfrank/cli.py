"""Command-line entry point ``sfrank``.

Subcommands: ``graphgen``, ``pagerank``, ``wbp``, ``stats`` and
``experiment``. Exit status is 0 on success, 1 on invalid input (bad flags,
malformed configs, unreadable files) and 2 when a computation fails.

Every run writes ``<out>.manifest.json``::

    {
      "command": [...argv...],
      "seed": 7,
      "config_digest": "<sha256 of the canonical JSON config>",
      "manifest_digest": "<sha256 of command, seed, config digest, versions>",
      "versions": {"sfrank": ..., "numpy": ..., "scipy": ..., "python": ...},
      "started": "<UTC ISO timestamp>",
      "finished": "<UTC ISO timestamp>"
    }

JSON outputs carry the ``manifest_digest`` of the run that produced them.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__, branching, experiments, io, stats
from .graphgen import AttributeConfig, AttemptsExhausted, build_dcm, build_ird, empirical_theta, sample_attributes
from .pagerank import compute_pagerank
from .rng import make_rng


class UsageError(Exception):
    """Invalid command-line input; maps to exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


class Manifest:
    def __init__(self, argv: list[str], seed, config: dict):
        self.argv = list(argv)
        self.seed = seed
        self.config_digest = _digest(config)
        self.versions = {
            "sfrank": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        }
        self.digest = _digest([self.argv, seed, self.config_digest, self.versions])
        self.started = _now()

    def write(self, out_prefix: str) -> None:
        io.write_json(
            str(out_prefix) + ".manifest.json",
            {
                "command": self.argv,
                "seed": self.seed,
                "config_digest": self.config_digest,
                "manifest_digest": self.digest,
                "versions": self.versions,
                "started": self.started,
                "finished": _now(),
            },
        )


# ---------------------------------------------------------------- graphgen


def _attribute_config(args) -> AttributeConfig:
    try:
        return AttributeConfig(
            n=args.n,
            alpha=args.alpha,
            b=args.b,
            beta=args.beta,
            c_scale=args.cscale,
            dependence="power_coupled" if args.dependence == "power" else args.dependence,
            damping=args.damping,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_graphgen(args, argv):
    config = _attribute_config(args)
    record = {
        "model": args.model,
        "mode": args.mode,
        "n": config.n,
        "alpha": config.alpha,
        "b": config.b,
        "beta": config.beta,
        "c_scale": config.c_scale,
        "dependence": config.dependence.value,
        "damping": config.damping,
        "theta": args.theta,
    }
    manifest = Manifest(argv, args.seed, record)
    rng = make_rng(args.seed)
    if args.model == "dcm":
        attrs = sample_attributes(config, rng, integer=True)
        try:
            graph = build_dcm(attrs, args.mode, rng, args.max_attempts)
        except AttemptsExhausted as exc:
            print(f"error: {exc}", file=sys.stderr)
            io.write_graph(args.out + ".last", exc.graph, {"seed": args.seed, "config": record, "manifest_digest": manifest.digest})
            return 2
    else:
        attrs = sample_attributes(config, rng)
        theta = config.theta if args.theta == "analytic" else empirical_theta(attrs)
        graph = build_ird(attrs, theta, rng)
    io.write_graph(args.out, graph, {"seed": args.seed, "config": record, "manifest_digest": manifest.digest})
    manifest.write(args.out)
    return 0


# ---------------------------------------------------------------- pagerank


def cmd_pagerank(args, argv):
    try:
        graph = io.read_graph(args.graph)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read graph {args.graph!r}: {exc}") from None
    record = {"graph": args.graph, "damping": args.damping, "iters": args.iters, "tol": args.tol}
    manifest = Manifest(argv, None, record)
    ranks = compute_pagerank(graph, args.damping, None if args.tol else args.iters, tol=args.tol)
    io.write_ranks(args.out, ranks.values)
    io.write_json(
        args.out + ".json",
        {
            "iterations": ranks.iterations,
            "residual_bound": ranks.residual_bound,
            "damping": ranks.damping,
            "n": graph.n,
            "manifest_digest": manifest.digest,
        },
    )
    manifest.write(args.out)
    return 0


# ---------------------------------------------------------------------- wbp


def cmd_wbp(args, argv):
    if args.source == "analytic":
        config = _attribute_config(args)
        source = config
    else:
        try:
            source = io.read_attributes(args.source)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read attributes {args.source!r}: {exc}") from None
    try:
        law = branching.law_from_dcm(source) if args.law == "dcm" else branching.law_from_ird(source)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    record = {k: getattr(args, k) for k in ("law", "source", "pool", "gens", "rstar", "depth")}
    if args.source == "analytic":
        record.update(n=args.n, alpha=args.alpha, b=args.b, beta=args.beta, cscale=args.cscale, dependence=args.dependence)
    manifest = Manifest(argv, args.seed, record)
    rng = make_rng(args.seed)
    moments = branching.law_moments(law, rng, min(args.pool, 200_000))
    pool = branching.population_dynamics(law, args.pool, args.gens, rng)
    r_star = branching.sample_r_star(law, pool, args.rstar, rng)
    io.write_samples(args.out, r_star.sorted_samples)
    meta = {
        "law": law.provenance.value,
        "rho1_estimate": moments.rho1[0],
        "rho1_stderr": moments.rho1[1],
        "pool": {
            "size": len(pool),
            "generations": pool.generation,
            "mean": float(pool.samples.mean()),
            "std": float(pool.samples.std()),
            "predicted_mean": moments.pool_mean,
        },
        "r_star": {"count": r_star.count, "mean": r_star.mean(), "stderr": r_star.std_error()},
        "manifest_digest": manifest.digest,
    }
    if args.depth is not None:
        try:
            tree = branching.simulate_tree_ranks(law, args.depth, min(args.rstar, 10_000), rng, args.node_budget)
            meta["tree_rank"] = {
                "depth": args.depth,
                "count": int(tree.size),
                "mean": float(tree.mean()),
                "w1_to_r_star": stats.wasserstein1(tree, r_star),
            }
        except branching.BudgetExceeded as exc:
            meta["tree_rank"] = {"depth": args.depth, "budget_exceeded": str(exc)}
    io.write_json(args.out + ".json", meta)
    manifest.write(args.out)
    return 0


# -------------------------------------------------------------------- stats


def _read(path):
    try:
        values = io.read_samples(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read samples {path!r}: {exc}") from None
    if values.size == 0:
        raise UsageError(f"{path}: no samples")
    return values


def cmd_stats(args, argv):
    if args.stat == "w1":
        result = {"w1": stats.wasserstein1(_read(args.a), _read(args.b))}
    else:
        values = _read(args.input)
        try:
            report = stats.hill_index(values, stats.default_k(values.size, args.k_frac))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = {"hill_index": report.hill_index, "k_used": report.k_used, "count": int(values.size)}
    manifest = Manifest(argv, None, vars(args) | {"func": None})
    result["manifest_digest"] = manifest.digest
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        manifest.write(args.out)
    else:
        print(text)
    return 0


# --------------------------------------------------------------- experiment

CONVERGENCE_KEYS = {"n_values": list, "seeds": int, "r_star_samples": int, "pool_size": int, "generations": int}
TAIL_KEYS = {"k_frac": float, "mc_draws": int, "pool_size": int, "generations": int}


def _split_config(data, extra_keys):
    if not isinstance(data, dict):
        raise experiments.ConfigError("config", "must be a JSON object")
    data = dict(data)
    extras = {}
    for key, kind in extra_keys.items():
        if key in data:
            value = data.pop(key)
            try:
                extras[key] = [int(v) for v in value] if kind is list else kind(value)
            except (TypeError, ValueError):
                raise experiments.ConfigError(key, f"invalid value {value!r}") from None
    return experiments.ExperimentConfig.from_dict(data), extras


def cmd_experiment(args, argv):
    try:
        raw = io.read_json(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
    try:
        keys = {"venn": {}, "convergence": CONVERGENCE_KEYS, "tail": TAIL_KEYS}[args.kind]
        config, extras = _split_config(raw, keys)
    except experiments.ConfigError as exc:
        raise UsageError(f"invalid config field {exc.field!r}: {exc}") from None
    manifest = Manifest(argv, config.seed, raw)
    if args.kind == "venn":
        result = experiments.run_venn(config, workers=args.workers)
        report = result.to_dict()
        if args.csv:
            cols = ["replication", "n", *experiments.REGIONS, *experiments.H_REGIONS, "A", "B", "C", "H"]
            lines = [",".join(cols)] + [",".join(str(rep[c]) for c in cols) for rep in result.per_replication]
            Path(args.out + ".csv").write_text("\n".join(lines) + "\n")
    elif args.kind == "convergence":
        seeds = range(extras.pop("seeds", 10))
        report = experiments.run_convergence(config, seeds=seeds, **extras)
        if args.csv:
            lines = ["n,seed,d1"] + [f"{r['n']},{r['seed']},{r['d1']!r}" for r in report["rows"]]
            Path(args.out + ".csv").write_text("\n".join(lines) + "\n")
    else:
        report = experiments.run_tail(config, **extras)
    report = {"kind": args.kind, "config": config.to_dict(), **report, "manifest_digest": manifest.digest}
    io.write_json(args.out, report)
    manifest.write(args.out)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfrank", description="Generalized PageRank on scale-free random digraphs.")
    parser.add_argument("--version", action="version", version=f"sfrank {__version__}")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for replications")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def attribute_flags(p, required):
        p.add_argument("--n", type=int, required=required, help="number of vertices")
        p.add_argument("--alpha", type=float, default=1.5, help="in-side Pareto index")
        p.add_argument("--b", type=float, default=8.0, help="in-side Pareto scale")
        p.add_argument("--beta", type=float, default=2.5, help="out-side Pareto index")
        p.add_argument("--cscale", type=float, default=12.0, help="out-side Pareto scale")
        p.add_argument("--dependence", choices=["independent", "power"], default="independent")
        p.add_argument("--damping", type=float, default=0.85)

    g = sub.add_parser("graphgen", help="sample attributes and build a DCM or IRD graph")
    g.add_argument("--model", choices=["dcm", "ird"], required=True)
    g.add_argument("--mode", choices=["multigraph", "repeated", "erased"], default="multigraph")
    attribute_flags(g, required=True)
    g.add_argument("--theta", choices=["empirical", "analytic"], default="empirical")
    g.add_argument("--max-attempts", type=int, default=100)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True, help="output path prefix")
    g.set_defaults(func=cmd_graphgen)

    p = sub.add_parser("pagerank", help="scale-free generalized PageRank of a saved graph")
    p.add_argument("--graph", required=True, help="graph path prefix")
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--tol", type=float, default=None, help="pick iterations from the error bound")
    p.add_argument("--out", required=True, help="rank CSV path")
    p.set_defaults(func=cmd_pagerank)

    w = sub.add_parser("wbp", help="population dynamics for the limit law and R* samples")
    w.add_argument("--law", choices=["dcm", "ird"], required=True)
    w.add_argument("--source", required=True, help="attribute CSV or 'analytic'")
    attribute_flags(w, required=False)
    w.add_argument("--pool", type=int, default=branching.DEFAULT_POOL)
    w.add_argument("--gens", type=int, default=branching.DEFAULT_GENERATIONS)
    w.add_argument("--rstar", type=int, default=100_000)
    w.add_argument("--depth", type=int, default=None, help="also grow explicit trees to this depth")
    w.add_argument("--node-budget", type=int, default=branching.DEFAULT_NODE_BUDGET)
    w.add_argument("--seed", type=int, required=True)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_wbp)

    s = sub.add_parser("stats", help="Wasserstein-1 distance or Hill tail index")
    ssub = s.add_subparsers(dest="stat", required=True, parser_class=_Parser)
    w1 = ssub.add_parser("w1")
    w1.add_argument("--a", required=True)
    w1.add_argument("--b", required=True)
    w1.add_argument("--out", default=None)
    hill = ssub.add_parser("hill")
    hill.add_argument("--in", dest="input", required=True)
    hill.add_argument("--k-frac", type=float, default=stats.DEFAULT_K_FRAC)
    hill.add_argument("--out", default=None)
    s.set_defaults(func=cmd_stats)

    e = sub.add_parser("experiment", help="Venn, convergence or tail experiment from a JSON config")
    e.add_argument("kind", choices=["venn", "convergence", "tail"])
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--csv", action="store_true", help="also write per-replication CSV")
    e.set_defaults(func=cmd_experiment)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "wbp" and args.source == "analytic" and args.n is None:
            raise UsageError("the following arguments are required for --source analytic: --n")
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        return args.func(args, argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"sfrank: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"sfrank: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
