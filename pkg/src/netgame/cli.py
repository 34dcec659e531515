"""Command-line entry point: ``netgame <subcommand> ...``.

Exit codes: 0 success (or stable), 1 unstable, 2 usage or input error.
Rational parameters may be given as ``p/q``. ``NETGAME_SEED`` sets the
default seed. Every JSON document carries the resolved config and the tool
version.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analytics import (
    ClassRule,
    CoreSpec,
    EdgeFormat,
    Motif,
    ParseError,
    Snapshot,
    configuration_model,
    load_edge_list,
    null_model_report,
    snapshot_metrics,
)
from .cost import CostParams, Mode, node_cost, social_cost
from .dynamics import (
    DynamicsConfig,
    Preference,
    Pricing,
    RoundRobin,
    Rule,
    Scripted,
    UniformRandom,
    classify_phase,
    classify_reliable_phase,
    run_game,
)
from .equilibrium import (
    DEFAULT_GUARD,
    SizeGuardError,
    is_pairwise_stable,
    is_pairwise_stable_with_transfers,
    optimal_bare_network,
    optimal_reliable_stable_network,
    price_report,
)

SEED_ENV = "NETGAME_SEED"
METRICS = ("nodes", "edges", "core_size", "core_density", "mean_core_distance", "unreachable", "core_ratio")
METRIC_ALIASES = {m.replace("_", "-"): m for m in METRICS} | {"core-distance": "mean_core_distance", "density": "core_density"}

log = logging.getLogger("netgame")


class CliError(Exception):
    """Bad input; reported on stderr with exit code 2."""


def rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}")


def emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def envelope(command: str, config: dict, result) -> dict:
    return {"tool": "netgame", "version": __version__, "command": command, "config": config, "result": result}


# ---------------------------------------------------------------------------
# shared option groups
# ---------------------------------------------------------------------------


def add_params(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("cost parameters")
    g.add_argument("--A", type=rational, default=Fraction(3), help="major-player weight (> 1)")
    g.add_argument("--c-A", dest="c_A", type=rational, default=Fraction(2), help="link price for majors")
    g.add_argument("--c-B", dest="c_B", type=rational, default=None, help="link price for minors (default: c-A)")
    g.add_argument("--delta", type=rational, default=Fraction(1), help="backup-path weight in (0, 1]")
    g.add_argument("--tau", type=int, choices=(0, 1), default=1, help="1: minors need backups to everyone")
    g.add_argument("--Q", type=rational, default=None, help="penalty (default 1000*N^2*(A+c_B))")
    g.add_argument("--mode", choices=[m.value for m in Mode], default="bare")
    g.add_argument("--flat-penalty", action="store_true", help="charge one Q however many targets are missing")


def params_from(args) -> CostParams:
    try:
        return CostParams(args.A, args.c_A, args.c_A if args.c_B is None else args.c_B, delta=args.delta,
                          tau=args.tau, Q=args.Q, mode=args.mode, flat_penalty=args.flat_penalty)
    except ValueError as exc:
        raise CliError(str(exc))


def add_loader(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=[EdgeFormat.PLAIN, EdgeFormat.AS_REL], default=EdgeFormat.PLAIN)
    who = parser.add_mutually_exclusive_group()
    who.add_argument("--majors", help="comma-separated ids of major players")
    who.add_argument("--top-m", type=int, help="the m highest-degree nodes are majors")


def load(path: str, args):
    if args.majors is not None:
        rule = ClassRule(majors=tuple(x for x in args.majors.split(",") if x))
    else:
        rule = ClassRule(top_m=args.top_m or 0)
    try:
        return load_edge_list(path, args.format, rule)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")
    except (ParseError, ValueError) as exc:
        raise CliError(str(exc))


def loader_config(args) -> dict:
    return {"format": args.format, "majors": args.majors, "top_m": args.top_m}


# ---------------------------------------------------------------------------
# stability / enumerate
# ---------------------------------------------------------------------------


def cmd_stability(args) -> int:
    p = params_from(args)
    loaded = load(args.file, args)
    check = is_pairwise_stable_with_transfers if args.transfers else is_pairwise_stable
    report = check(loaded.net, p)
    result = report.as_dict()
    result["labels"] = loaded.labels
    config = {"file": args.file, "params": p.as_dict(), "transfers": args.transfers} | loader_config(args)
    emit(envelope("stability", config, result))
    return 0 if report.stable else 1


def cmd_enumerate(args) -> int:
    p = params_from(args)
    n = args.n_a + args.n_b
    guard = max(args.guard, n) if args.force else args.guard
    try:
        report = price_report(p, args.n_a, args.n_b, transfers=args.transfers,
                              with_reliability=args.reliability, guard=guard)
    except SizeGuardError as exc:
        raise CliError(f"{exc}; pass --force to enumerate anyway")
    except ValueError as exc:
        raise CliError(str(exc))
    config = {"n_A": args.n_a, "n_B": args.n_b, "params": p.as_dict(), "transfers": args.transfers,
              "reliability": args.reliability, "guard": guard}
    emit(envelope("enumerate", config, report.as_dict()))
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

SIM_DEFAULTS = {
    "A": "3",
    "c_A": "2",
    "c_B": None,
    "delta": "1",
    "tau": "1",
    "Q": None,
    "mode": "bare",
    "flat_penalty": "false",
    "n_A": None,
    "n_B": None,
    "rule": Rule.STRICT.value,
    "transfers": "false",
    "preference": Preference.EFFICIENT.value,
    "pricing": Pricing.EFFICIENT.value,
    "scheduler": "uniform",
    "arrival_order": None,
    "max_rounds": "50",
    "rounds_between_arrivals": "1",
    "seed": None,
    "replicas": "1",
    "trace": None,
    "summary": None,
}


def read_run_config(path: str) -> dict[str, str | None]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")
    config = dict(SIM_DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise CliError(f"{path}:{lineno}: expected 'key = value'")
        if key not in SIM_DEFAULTS:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        config[key] = value
    return config


def _flag(value: str, key: str) -> bool:
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise CliError(f"{key} must be a boolean, got {value!r}")


def _int(value, key: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise CliError(f"{key} must be an integer, got {value!r}")


def resolve_run(config: dict, seed_override: int | None) -> dict:
    """Turn raw strings into typed settings; the echo keeps the strings."""
    for key in ("n_A", "n_B"):
        if config[key] is None:
            raise CliError(f"config needs {key}")
    if config["c_B"] is None:
        config["c_B"] = config["c_A"]
    if seed_override is not None:
        config["seed"] = str(seed_override)
    elif config["seed"] is None:
        config["seed"] = str(default_seed())
    try:
        params = CostParams(Fraction(config["A"]), Fraction(config["c_A"]), Fraction(config["c_B"]),
                            delta=Fraction(config["delta"]), tau=_int(config["tau"], "tau"),
                            Q=None if config["Q"] is None else Fraction(config["Q"]), mode=config["mode"],
                            flat_penalty=_flag(config["flat_penalty"], "flat_penalty"))
        settings = {
            "params": params,
            "n_a": _int(config["n_A"], "n_A"),
            "n_b": _int(config["n_B"], "n_B"),
            "rule": Rule(config["rule"]),
            "transfers": _flag(config["transfers"], "transfers"),
            "preference": Preference(config["preference"]),
            "pricing": Pricing(config["pricing"]),
            "max_rounds": _int(config["max_rounds"], "max_rounds"),
            "rounds_between_arrivals": _int(config["rounds_between_arrivals"], "rounds_between_arrivals"),
            "seed": _int(config["seed"], "seed"),
            "replicas": _int(config["replicas"], "replicas"),
        }
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"bad config: {exc}")
    if settings["max_rounds"] < 1:
        raise CliError("max_rounds must be at least 1")
    if settings["replicas"] < 1:
        raise CliError("replicas must be at least 1")
    if config["scheduler"] not in ("uniform", "round_robin", "scripted"):
        raise CliError(f"unknown scheduler {config['scheduler']!r}")
    if config["scheduler"] == "scripted":
        if not config["arrival_order"]:
            raise CliError("scripted scheduler needs arrival_order")
        try:
            settings["arrival_order"] = tuple(int(x) for x in config["arrival_order"].split(","))
        except ValueError:
            raise CliError("arrival_order must be comma-separated integers")
    return settings


def _scheduler(kind: str, seed: int, settings: dict):
    if kind == "uniform":
        return UniformRandom(seed)
    if kind == "round_robin":
        return RoundRobin()
    return Scripted(settings["arrival_order"])


def _benchmark(params: CostParams, n_a: int, n_b: int):
    """Reference optimum for the ``state`` label, if one is known."""
    if params.mode is Mode.BARE and n_a >= 1:
        return social_cost(optimal_bare_network(params, n_a, n_b), params)
    if params.mode is Mode.RELIABLE and params.tau == 1 and n_a >= 2:
        return social_cost(optimal_reliable_stable_network(params, n_a, n_b), params)
    return None


def simulate_one(job) -> dict:
    settings, scheduler_kind, seed = job
    p = settings["params"]
    cfg = DynamicsConfig(p, rule=settings["rule"], transfers=settings["transfers"],
                         preference=settings["preference"], pricing=settings["pricing"],
                         scheduler=_scheduler(scheduler_kind, seed, settings), max_rounds=settings["max_rounds"],
                         seed=seed, rounds_between_arrivals=settings["rounds_between_arrivals"])
    trace, state = run_game(cfg, settings["n_a"], settings["n_b"])
    final = social_cost(state.net, p)
    penalized = [i for i in range(state.net.n) if node_cost(state.net, p, i).penalized]
    best = _benchmark(p, settings["n_a"], settings["n_b"])
    if best is not None and final == best:
        label = "optimal"
    elif penalized:
        label = "q_dominated"
    else:
        label = "other"
    phase = classify_reliable_phase(state, p) if p.mode is Mode.RELIABLE else classify_phase(state, p)
    row = {
        "seed": seed,
        "converged": trace.converged,
        "rounds": trace.rounds_after_arrivals,
        "active_rounds": trace.active_rounds_after_arrivals,
        "budget_hits": trace.budget_hits,
        "social_cost": str(final),
        "ratio_to_optimal": None if not best else float(final / best),
        "state": label,
        "q_dominated": bool(penalized),
        "penalized_players": penalized,
        "region": int(phase.region),
        "edges": state.net.edges(),
    }
    return {"row": row, "trace": trace.to_jsonl()}


def _trace_path(template: str, seed: int, replicas: int) -> Path:
    path = Path(template)
    if replicas == 1:
        return path
    return path.with_name(f"{path.stem}.seed{seed}{path.suffix or '.jsonl'}")


def cmd_simulate(args) -> int:
    raw = read_run_config(args.config)
    if args.trace is not None:
        raw["trace"] = args.trace
    if args.summary is not None:
        raw["summary"] = args.summary
    settings = resolve_run(raw, args.seed)
    seeds = [settings["seed"] + k for k in range(settings["replicas"])]
    jobs = [(settings, raw["scheduler"], s) for s in seeds]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(simulate_one, jobs))
    else:
        results = [simulate_one(j) for j in jobs]
    if raw["trace"]:
        for seed, res in zip(seeds, results):
            _trace_path(raw["trace"], seed, len(seeds)).write_text(res["trace"], encoding="utf-8")
    rows = [r["row"] for r in results]
    if raw["summary"]:
        with open(raw["summary"], "w", newline="", encoding="utf-8") as fh:
            fields = [k for k in rows[0] if k != "edges"]
            writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
    for row in rows:
        sys.stderr.write(f"seed={row['seed']} converged={str(row['converged']).lower()} state={row['state']}\n")
    emit(envelope("simulate", raw, rows))
    return 0


# ---------------------------------------------------------------------------
# analyze / motifs / nullmodel
# ---------------------------------------------------------------------------


def parse_core(text: str) -> CoreSpec:
    kind, _, value = text.partition(":")
    try:
        if kind == "k":
            return CoreSpec(k_level=int(value))
        if kind == "top":
            return CoreSpec(top_ranked=int(value))
        if kind == "nodes":
            return CoreSpec(nodes=frozenset(int(x) for x in value.split(",") if x))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"core must be k:<level>, top:<m> or nodes:<i,j,...>, got {text!r}")


def parse_metric(text: str) -> str:
    name = METRIC_ALIASES.get(text)
    if name is None:
        raise argparse.ArgumentTypeError(f"unknown metric {text!r}; choose from {sorted(METRIC_ALIASES)}")
    return name


def cmd_analyze(args) -> int:
    metrics = args.metric or list(METRICS)
    rows = []
    for path in args.snapshots:
        loaded = load(path, args)
        net = loaded.net
        rank = {v: float(net.degree(v)) for v in range(net.n)}  # top:m ranks by degree
        try:
            full = snapshot_metrics(Snapshot(Path(path).stem, net, rank), args.core)
        except ValueError as exc:
            raise CliError(f"{path}: {exc}")
        rows.append({"label": full["label"]} | {m: full[m] for m in metrics})
    buf = io.StringIO()
    buf.write(f"# netgame {__version__} analyze core={args.core_text} format={args.format}\n")
    writer = csv.DictWriter(buf, fieldnames=["label", *metrics], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def parse_motif(text: str) -> Motif:
    kind, _, size = text.partition(":")
    kinds = {"double-star": "double_star", "double_star": "double_star",
             "entangled": "entangled_cycle", "entangled-cycle": "entangled_cycle",
             "entangled_cycle": "entangled_cycle"}
    try:
        return Motif(kinds[kind], int(size))
    except (KeyError, ValueError):
        raise argparse.ArgumentTypeError(f"motif must be double-star:<m> or entangled-cycle:<3|4>, got {text!r}")


def cmd_motifs(args) -> int:
    loaded = load(args.snapshot, args)
    seed = default_seed() if args.seed is None else args.seed
    report = null_model_report(loaded.net, args.motif, samples=args.samples, seed=seed, jobs=args.jobs)
    config = {"snapshot": args.snapshot, "motif": str(args.motif), "samples": args.samples, "seed": seed} | loader_config(args)
    emit(envelope("motifs", config, report.as_dict()))
    return 0


def cmd_nullmodel(args) -> int:
    if args.degrees is not None:
        try:
            degrees = [int(x) for x in args.degrees.split(",") if x.strip()]
        except ValueError:
            raise CliError("degrees must be comma-separated integers")
        source = {"degrees": degrees}
    else:
        net = load(args.snapshot, args).net
        degrees = [net.degree(v) for v in range(net.n)]
        source = {"snapshot": args.snapshot} | loader_config(args)
    seed = default_seed() if args.seed is None else args.seed
    import numpy as np  # only this command needs the seed tree directly

    samples = []
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(args.samples)):
        try:
            sample = configuration_model(degrees, child)
        except ValueError as exc:
            raise CliError(str(exc))
        entry = {"index": k, "erased_fraction": sample.erased_fraction, "self_loops": sample.self_loops,
                 "multi_edges": sample.multi_edges, "edges": sample.net.edge_count()}
        if out_dir:
            path = out_dir / f"cm_{k:04d}.txt"
            path.write_text("".join(f"{u} {v}\n" for u, v in sample.net.edges()), encoding="utf-8")
            entry["file"] = str(path)
        samples.append(entry)
    erased = [s["erased_fraction"] for s in samples]
    config = source | {"samples": args.samples, "seed": seed}
    result = {"mean_erased_fraction": sum(erased) / len(erased), "max_erased_fraction": max(erased),
              "samples": samples}
    emit(envelope("nullmodel", config, result))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netgame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"netgame {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stability", help="check pairwise stability of a network file")
    p.add_argument("file")
    p.add_argument("--transfers", action="store_true", help="use the transfer-stability criterion")
    add_loader(p)
    add_params(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("enumerate", help="exhaustive PoS/PoA (and PoR) on a small instance")
    p.add_argument("n_a", type=int)
    p.add_argument("n_b", type=int)
    p.add_argument("--transfers", action="store_true")
    p.add_argument("--reliability", action="store_true", help="also report PoR (reliable mode)")
    p.add_argument("--guard", type=int, default=DEFAULT_GUARD, help="largest N enumerated without --force")
    p.add_argument("--force", action="store_true")
    add_params(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("simulate", help="run the dynamics from a key = value config file")
    p.add_argument("config")
    p.add_argument("--trace", help="trace log path (overrides the config)")
    p.add_argument("--summary", help="summary CSV path (overrides the config)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="core metrics for a series of snapshots (CSV)")
    p.add_argument("snapshots", nargs="+")
    p.add_argument("--core", dest="core_text", required=True, help="k:<level>, top:<m> or nodes:<i,j,...>")
    p.add_argument("--metric", action="append", type=parse_metric, help="repeatable; default all")
    p.add_argument("--out")
    add_loader(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("motifs", help="motif count against a configuration-model null (JSON)")
    p.add_argument("snapshot")
    p.add_argument("--motif", type=parse_motif, required=True, help="double-star:<m> or entangled-cycle:<3|4>")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    add_loader(p)
    p.set_defaults(func=cmd_motifs)

    p = sub.add_parser("nullmodel", help="draw configuration-model samples for a degree sequence")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--degrees", help="comma-separated degree sequence")
    src.add_argument("--snapshot", help="take the degree sequence from an edge list")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", help="write each sample as an edge list here")
    add_loader(p)
    p.set_defaults(func=cmd_nullmodel)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "analyze":
            try:
                args.core = parse_core(args.core_text)
            except argparse.ArgumentTypeError as exc:
                raise CliError(str(exc))
        if getattr(args, "samples", 2) < (2 if args.command == "motifs" else 1):
            raise CliError("too few samples")
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"netgame {args.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
