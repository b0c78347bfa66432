"""Command line front end.

Subcommands: ingest, gen-synth, select, eval, sweep, alpha-sweep.  Every flag
has a config-file twin: pass ``--config FILE`` where the file holds flat
``key = value`` lines (keys spelled like the flags, dashes or underscores);
command-line flags override config values.
"""

from __future__ import annotations

import argparse
import json
import sys

from .datasets import generate_synthetic, ingest
from .diffusion import DEFAULT_THETA
from .harness import (ALGORITHMS, DEFAULT_ALPHAS, DEFAULT_BUDGETS, OBJECTIVES,
                      PROB_SETTINGS, CampaignSpec, alpha_sweep, prepare_campaign,
                      run_experiment, run_selection)
from .selection import objective_value


def _csv_floats(text):
    return tuple(float(x) for x in str(text).split(",") if x != "")


def _csv_ints(text):
    return tuple(int(x) for x in str(text).split(",") if x != "")


def _csv_names(text):
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def load_config(path) -> dict:
    """Flat key/value file: ``key = value`` (or ``key value``), # comments."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, value = line.split("=", 1)
            else:
                key, value = line.split(None, 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, config: dict) -> None:
    """Install config values as typed defaults on a subcommand parser."""
    for action in parser._actions:
        if action.dest not in config:
            continue
        raw = config[action.dest]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        parser.set_defaults(**{action.dest: value})
        action.required = False


def _add_campaign_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file with flag twins")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--prob-setting", choices=PROB_SETTINGS, default="trivalency")
    p.add_argument("--prob-seed", type=int, default=0)
    p.add_argument("--cost-seed", type=int, default=0)
    p.add_argument("--benefit-seed", type=int, default=0)
    p.add_argument("--baseline-seed", type=int, default=0)
    p.add_argument("--community-seed", type=int, default=None)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--objective", choices=OBJECTIVES, default="influence")
    p.add_argument("--tag-cap", type=int, default=1000)
    p.add_argument("--target-tags", type=_csv_ints, default=(),
                   help="comma-separated tag ids defining the target users")
    p.add_argument("--prune-k", type=int, default=200)
    p.add_argument("--prob-file", action="store_true",
                   help="replay probabilities from the dataset's probs.tsv")


def _spec_from_args(args, algos, budgets) -> CampaignSpec:
    return CampaignSpec(
        dataset=args.dataset,
        prob_setting=args.prob_setting,
        objective=args.objective,
        algos=tuple(algos),
        budgets=tuple(float(b) for b in budgets),
        theta=args.theta,
        alpha=args.alpha,
        tag_cap=args.tag_cap,
        target_tags=tuple(args.target_tags),
        prob_seed=args.prob_seed,
        cost_seed=args.cost_seed,
        benefit_seed=args.benefit_seed,
        baseline_seed=args.baseline_seed,
        community_seed=args.community_seed,
        prune_k=args.prune_k,
        use_prob_file=args.prob_file,
    )


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    top = argparse.ArgumentParser(prog="tagim",
                                  description="Budgeted seed-and-tag campaign selection")
    sub = top.add_subparsers(dest="command", required=True)
    parsers = {}

    p = sub.add_parser("ingest", help="convert raw TSV files to a dataset directory")
    p.add_argument("--config")
    p.add_argument("--edges", required=True)
    p.add_argument("--tags", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--directed", action="store_true",
                   help="edge rows are already directed (default: expand both ways)")
    p.add_argument("--tag-field", type=int, default=1,
                   help="column of the tag id in the tag file (0-based)")
    parsers["ingest"] = p

    p = sub.add_parser("gen-synth", help="generate a synthetic dataset")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--communities", type=int, default=4)
    p.add_argument("--tags", type=int, default=40)
    p.add_argument("--p-in", type=float, default=0.08)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--mean-tags", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    parsers["gen-synth"] = p

    p = sub.add_parser("select", help="run one algorithm at one budget")
    _add_campaign_args(p)
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--trace", help="write greedy trace records (JSON lines)")
    p.add_argument("--out", help="write the selection JSON here (default stdout)")
    parsers["select"] = p

    p = sub.add_parser("eval", help="evaluate a stored selection")
    _add_campaign_args(p)
    p.add_argument("--selection", required=True, help="selection JSON file")
    parsers["eval"] = p

    p = sub.add_parser("sweep", help="budget sweep over algorithms, with reports")
    _add_campaign_args(p)
    p.add_argument("--algos", type=_csv_names, default=("emig-u",))
    p.add_argument("--budgets", type=_csv_floats, default=DEFAULT_BUDGETS)
    p.add_argument("--out", required=True, help="report directory")
    parsers["sweep"] = p

    p = sub.add_parser("alpha-sweep", help="benefit sweep across alpha values")
    _add_campaign_args(p)
    p.add_argument("--algos", type=_csv_names, default=("emig-u",))
    p.add_argument("--budgets", type=_csv_floats, default=DEFAULT_BUDGETS)
    p.add_argument("--alphas", type=_csv_floats, default=DEFAULT_ALPHAS)
    p.add_argument("--out", required=True, help="report directory")
    parsers["alpha-sweep"] = p

    return top, parsers


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    top, parsers = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        config = load_config(known.config)
        command = next((a for a in argv if not a.startswith("-")), None)
        if command in parsers:
            _apply_config(parsers[command], config)
    args = top.parse_args(argv)

    if args.command == "ingest":
        manifest = ingest(args.edges, args.tags, args.out,
                          directed=args.directed, tag_field=args.tag_field)
        print(json.dumps({"nodes": manifest["node_count"],
                          "tags": manifest["tag_count"]}))
        return 0

    if args.command == "gen-synth":
        ds = generate_synthetic(args.out, args.n, args.communities, args.tags,
                                args.p_in, args.p_out, args.seed,
                                mean_tags=args.mean_tags)
        print(json.dumps({"nodes": ds.graph.n, "edges": ds.graph.m,
                          "tags": ds.graph.tag_count}))
        return 0

    if args.command == "select":
        spec = _spec_from_args(args, (args.algo,), (args.budget,))
        prep = prepare_campaign(spec)
        sel, trace = run_selection(prep, args.algo, args.budget)
        value = objective_value(prep.graph, sel.seeds, sel.tags,
                                prep.objective, spec.theta)
        payload = {"algo": args.algo, "budget": args.budget,
                   "objective": spec.objective, "value": value,
                   **sel.to_dict()}
        text = json.dumps(payload, indent=1)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        if args.trace and trace is not None:
            with open(args.trace, "w") as fh:
                for record in trace.records:
                    fh.write(json.dumps(record.to_dict()) + "\n")
        return 0

    if args.command == "eval":
        spec = _spec_from_args(args, ("emig-u",), (1.0,))
        prep = prepare_campaign(spec)
        with open(args.selection) as fh:
            stored = json.load(fh)
        value = objective_value(prep.graph, stored["seeds"], stored["tags"],
                                prep.objective, spec.theta)
        print(json.dumps({"objective": spec.objective, "value": value}))
        return 0

    if args.command == "sweep":
        spec = _spec_from_args(args, args.algos, args.budgets)
        rows = run_experiment(spec, out_dir=args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
        return 0

    if args.command == "alpha-sweep":
        spec = _spec_from_args(args, args.algos, args.budgets)
        results = alpha_sweep(spec, alphas=args.alphas, out_dir=args.out)
        total = sum(len(v) for v in results.values())
        print(f"wrote {total} rows across {len(results)} alphas to {args.out}")
        return 0

    return 1


if __name__ == "__main__":
    raise SystemExit(main())
