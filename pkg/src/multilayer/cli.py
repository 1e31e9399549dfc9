"""Command-line front end.  Every subcommand writes CSV (or JSON) to stdout.

Exit codes: 0 success, 2 validation error, 3 size-cap error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import asymptotic, exact_line, exact_tree, feasibility, montecarlo, topologies
from .model import (BaseGraph, LinkConfiguration, ModelError, ModelParams, SizeCapError, _lines,
                    parse_graph, parse_params, validate_model)


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def parse_range(text: str) -> list:
    """``5``, ``1,2,5``, ``1..10`` or ``0.1..0.9:0.1`` (inclusive)."""
    def num(s: str):
        s = s.strip()
        try:
            return int(s)
        except ValueError:
            return float(Fraction(s))

    text = text.strip()
    try:
        if ".." in text:
            lo, _, rest = text.partition("..")
            hi, _, step = rest.partition(":")
            lo, hi = num(lo), num(hi)
            step = num(step) if step else 1
            if step <= 0:
                raise ModelError(f"range step must be positive in {text!r}")
            if all(isinstance(v, int) for v in (lo, hi, step)):
                vals = list(range(lo, hi + 1, step))
            else:
                count = int(np.floor((hi - lo) / step + 1e-9)) + 1
                vals = [round(lo + k * step, 12) for k in range(count)]
        else:
            vals = [num(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise ModelError(f"bad range {text!r}") from None
    if not vals:
        raise ModelError(f"empty range {text!r}")
    return vals


@dataclass(frozen=True)
class SweepSpec:
    variable: str | None
    values: list
    fixed: dict

    def points(self) -> list[dict]:
        if self.variable is None:
            return [dict(self.fixed)]
        return [dict(self.fixed, **{self.variable: v}) for v in self.values]


def make_sweep(**ranges: list) -> SweepSpec:
    multi = [k for k, v in ranges.items() if v is not None and len(v) > 1]
    if len(multi) > 1:
        raise ModelError(f"only one swept variable allowed, got {', '.join(multi)}")
    fixed = {k: v[0] for k, v in ranges.items() if v is not None and len(v) == 1}
    if multi:
        return SweepSpec(multi[0], ranges[multi[0]], fixed)
    return SweepSpec(None, [], fixed)


def _map_ordered(fn: Callable, items: Sequence) -> list:
    workers = montecarlo.default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _emit(out, argv: Sequence[str], key: str, rows: list[tuple], metric: str | None = None):
    out.write("# multilayer " + " ".join(shlex.quote(a) for a in argv) + "\n")
    out.write(f"{key},value,metric\n" if metric is not None else f"{key},value\n")
    for k, v in rows:
        out.write(f"{fmt(k)},{fmt(v)}" + (f",{metric}\n" if metric is not None else "\n"))


# ---------------------------------------------------------------- line-metrics


def _line_point(args, pt) -> exact_line.LineSpec:
    n, M = int(pt["n"]), int(pt["M"])
    q = M ** -args.q_power if args.q_power is not None else float(pt["q"])
    return exact_line.LineSpec(n, q, M)


def _line_value(args, spec: exact_line.LineSpec) -> float:
    n = spec.n
    if args.metric == "cluster":
        return exact_line.expected_cluster_size(n, args.node, spec)
    if args.metric == "links":
        return exact_line.expected_active_links(n, spec)
    if args.metric == "allzero":
        return exact_line.q_all_zero(n, spec)
    bits = _config_bits(args.config, n)
    return exact_line.config_prob(bits, spec)


def _config_bits(text: str | None, n_links: int) -> LinkConfiguration:
    if text in (None, "all-ones"):
        return LinkConfiguration.ones(n_links)
    if text == "all-zeros":
        return LinkConfiguration.zeros(n_links)
    x = LinkConfiguration.from_string(text)
    if len(x) != n_links:
        raise ModelError(f"configuration has {len(x)} bits, graph has {n_links} links")
    return x


def _verify_line(args, spec: exact_line.LineSpec, exact: float) -> float:
    g = BaseGraph.path(spec.n)
    params = ModelParams.uniform(g, spec.M, 1, 1.0, spec.q)
    cfg = dict(replications=args.replications, seed=args.seed)
    if args.metric == "cluster":
        rep = montecarlo.simulate(g, params, montecarlo.SimConfig(cluster_nodes=(args.node - 1,), **cfg))
        est = rep.cluster[args.node - 1]
    elif args.metric == "links":
        est = montecarlo.simulate(g, params, montecarlo.SimConfig(active_link_count=True, **cfg)).active_links
    else:
        target = (0,) * spec.n if args.metric == "allzero" else _config_bits(args.config, spec.n).bits
        est = montecarlo.simulate(g, params, montecarlo.SimConfig(target=target, **cfg)).target
    return est.z_score(exact)


def cmd_line_metrics(args, out) -> int:
    if args.q is None and args.q_power is None:
        raise ModelError("give --q or --q-power")
    sweep = make_sweep(n=parse_range(args.n), M=parse_range(args.M),
                       q=parse_range(args.q) if args.q is not None else None)
    if args.metric == "cluster" and args.node is None:
        args.node = 1
    points = sweep.points()

    def run(pt):
        spec = _line_point(args, pt)
        val = _line_value(args, spec)
        dev = _verify_line(args, spec, val) if args.verify else None
        return val, dev

    results = _map_ordered(run, points)
    key = sweep.variable or "M"
    rows = [(pt[key], val) for pt, (val, _) in zip(points, results)]
    _emit(out, args.argv, key, rows, args.metric)
    if args.verify:
        out.write(f"# verify: max deviation {fmt(max(d for _, d in results))} standard errors "
                  f"({args.replications} replications per point)\n")
    return 0


# ---------------------------------------------------------------- tree-prob


def _load_graph(args) -> BaseGraph:
    if getattr(args, "graph", None):
        return parse_graph(Path(args.graph))
    if getattr(args, "topology", None):
        return topologies.by_name(args.topology)
    raise ModelError("give --graph or --topology")


def cmd_tree_prob(args, out) -> int:
    g = _load_graph(args)
    if not g.is_tree():
        raise ModelError("tree-prob needs a tree")
    x = _config_bits(args.config, g.n_links)
    base = parse_params(Path(args.params), g) if args.params else None
    sweep = make_sweep(M=parse_range(args.M) if args.M else None,
                       q=parse_range(args.q) if args.q else None)
    tree = exact_tree.RootedTree.from_graph(g, args.root)
    points = sweep.points()

    def run(pt):
        params = base
        if params is None:
            if "M" not in pt or "q" not in pt:
                raise ModelError("give --params or both --M and --q")
            params = ModelParams.uniform(g, int(pt["M"]), args.K, args.p, float(pt["q"]))
        else:
            changes = {}
            if "M" in pt:
                changes["M"] = int(pt["M"])
            if "q" in pt:
                changes["q"] = (float(pt["q"]),) * g.n
            params = params.with_(**changes)
        validate_model(g, params).raise_for_errors()
        val = exact_tree.tree_config_prob(tree, x, params)
        dev = None
        if args.verify:
            rep = montecarlo.simulate(g, params, montecarlo.SimConfig(
                args.replications, args.seed, target=x.bits))
            dev = rep.target.z_score(val)
        return val, dev

    results = _map_ordered(run, points)
    key = sweep.variable or ("q" if "q" in sweep.fixed else "M")
    rows = [(pt.get(key, ""), val) for pt, (val, _) in zip(points, results)]
    _emit(out, args.argv, key, rows, "config_prob")
    if args.verify:
        out.write(f"# verify: max deviation {fmt(max(d for _, d in results))} standard errors "
                  f"({args.replications} replications per point)\n")
    return 0


# ---------------------------------------------------------------- asymptotic


def _rate_json(r):
    return "inf" if r is asymptotic.INFINITE else r


def cmd_asymptotic(args, out) -> int:
    g = _load_graph(args)
    if args.scaling:
        spec = asymptotic.parse_scaling(Path(args.scaling), g)
    else:
        spec = asymptotic.ScalingSpec.uniform(g, args.alpha, args.beta, args.c, args.d)
    limit = asymptotic.poisson_lambda(spec, g)
    report: dict = {
        "command": "multilayer " + " ".join(shlex.quote(a) for a in args.argv),
        "lambda": {f"{u}-{v}": _rate_json(r) for (u, v), r in zip(g.links, limit.rates)},
        "regularity_violations": [
            {"node": v.node, "beta": str(v.beta), "critical_neighbours": list(v.critical_neighbours)}
            for v in limit.violations],
    }
    if len(set(spec.alpha)) == 1 and len(set(spec.beta)) == 1 and len(set(spec.c)) == 1 and len(set(spec.d)) == 1:
        reg = asymptotic.trichotomy(spec.alpha[0], spec.beta[0], spec.c[0], spec.d[0], args.K)
        report["regime"] = {"regime": reg.regime.value, "link_prob": reg.link_prob}
    if args.p_c is not None:
        report["giant_component_d_threshold"] = asymptotic.giant_component_threshold(args.p_c)
    wants_limit = args.config is not None or args.limit_metrics is not None
    if wants_limit and limit.violations:
        json.dump(report, out, indent=2)
        out.write("\n")
        for v in limit.violations:
            print(f"regularity violated at {v}", file=sys.stderr)
        return 2
    if args.config is not None:
        x = _config_bits(args.config, g.n_links)
        report["limit_config_prob"] = {"config": str(x), "prob": asymptotic.limit_config_prob(x, limit, args.K)}
    if args.limit_metrics is not None:
        rates = {r if r is asymptotic.INFINITE else float(r) for r in limit.rates}
        if len(rates) != 1:
            raise ModelError("line limit metrics need a common rate on every link")
        (rate,) = rates
        rows = []
        for n in parse_range(args.limit_metrics):
            m = asymptotic.limit_cluster_metrics(int(n), rate, args.K)
            rows.append({"n": int(n), "expected_cluster_size": m.expected_cluster_size,
                         "expected_active_links": m.expected_active_links})
        report["limit_line_metrics"] = rows
    json.dump(report, out, indent=2)
    out.write("\n")
    return 0


# ---------------------------------------------------------------- simulate


def parse_layer_params(source: str | Path, g: BaseGraph) -> asymptotic.NonIdenticalParams:
    """Per-layer parameter file.

    ``M``, ``K``, uniform ``p``/``q`` and the usual overrides apply to every
    layer; ``layer m p value``, ``layer m q value``, ``layer m p u v value``
    and ``layer m q u value`` override layer ``m`` (1-based).
    """
    rows = _lines(source)
    base_rows = [r for r in rows if r[0] != "layer"]
    base = parse_params("\n".join(" ".join(r) for r in base_rows), g)
    p = np.tile(np.asarray(base.p), (base.M, 1))
    q = np.tile(np.asarray(base.q), (base.M, 1))
    for r in rows:
        if r[0] != "layer":
            continue
        try:
            m = int(r[1]) - 1
            if not 0 <= m < base.M:
                raise ModelError(f"layer {r[1]} outside 1..{base.M}")
            key, args = r[2], r[3:]
            if key == "p" and len(args) == 1:
                p[m, :] = float(args[0])
            elif key == "q" and len(args) == 1:
                q[m, :] = float(args[0])
            elif key == "p" and len(args) == 3:
                p[m, g.link_index(int(args[0]), int(args[1]))] = float(args[2])
            elif key == "q" and len(args) == 2:
                q[m, int(args[0])] = float(args[1])
            else:
                raise ModelError(f"unrecognised layer line: {' '.join(r)}")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"bad layer line {' '.join(r)!r}: {exc}") from None
    return asymptotic.NonIdenticalParams(p, q, base.K)


def cmd_simulate(args, out) -> int:
    g = _load_graph(args)
    if args.per_layer:
        params = parse_layer_params(Path(args.per_layer), g)
    elif args.params:
        params = parse_params(Path(args.params), g)
    else:
        if args.M is None or args.q is None:
            raise ModelError("give --params, --per-layer or --M with --q")
        params = ModelParams.uniform(g, args.M, args.K, args.p, args.q)
    stats = args.stat or ["links"]
    cluster, config, links, target = [], False, False, None
    for s in stats:
        if s == "links":
            links = True
        elif s == "config":
            config = True
        elif s.startswith("cluster:"):
            cluster.append(int(s.split(":", 1)[1]))
        elif s.startswith("target:"):
            target = _config_bits(s.split(":", 1)[1], g.n_links).bits
        else:
            raise ModelError(f"unknown statistic {s!r}")
    cfg = montecarlo.SimConfig(args.replications, args.seed, config_counts=config,
                               cluster_nodes=tuple(cluster), active_link_count=links,
                               target=target, workers=args.workers)
    rep = montecarlo.simulate(g, params, cfg)
    out.write("# multilayer " + " ".join(shlex.quote(a) for a in args.argv) + "\n")
    out.write("statistic,estimate,stderr,replications\n")
    if links:
        e = rep.active_links
        out.write(f"active_links,{fmt(e.mean)},{fmt(e.stderr)},{e.n}\n")
    for node, e in rep.cluster.items():
        out.write(f"cluster_size:{node},{fmt(e.mean)},{fmt(e.stderr)},{e.n}\n")
    if target is not None:
        e = rep.target
        out.write(f"config:{''.join(map(str, target))},{fmt(e.mean)},{fmt(e.stderr)},{e.n}\n")
    if config:
        for mask in rep.config:
            e = rep.config_estimate(mask)
            bits = str(LinkConfiguration.from_mask(mask, g.n_links))
            out.write(f"config:{bits},{fmt(e.mean)},{fmt(e.stderr)},{e.n}\n")
    if isinstance(params, asymptotic.NonIdenticalParams):
        diag = asymptotic.nonidentical_diagnostics(params, g)
        for (u, v), s, mx in zip(g.links, diag.sum_r, diag.max_r):
            out.write(f"sum_r:{u}-{v},{fmt(s)},,\n")
            out.write(f"max_r:{u}-{v},{fmt(mx)},,\n")
        for (a, b), val in diag.overlap.items():
            la, lb = g.links[a], g.links[b]
            out.write(f"overlap:{la[0]}-{la[1]}/{lb[0]}-{lb[1]},{fmt(val)},,\n")
    return 0


# ---------------------------------------------------------------- feasible


def cmd_feasible(args, out) -> int:
    g = BaseGraph.complete(args.complete) if args.complete else _load_graph(args)
    x = _config_bits(args.config, g.n_links)
    witness = feasibility.feasibility_witness(x, args.M, g)
    if witness is None:
        out.write("INFEASIBLE\n")
        return 0
    out.write("FEASIBLE\n")
    for c in witness.cliques:
        out.write("clique " + " ".join(map(str, sorted(c))) + "\n")
    return 0


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multilayer", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_verify(p):
        p.add_argument("--verify", action="store_true", help="cross-check against Monte Carlo")
        p.add_argument("--replications", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("line-metrics", help="line network metrics (p = 1, K = 1)")
    p.add_argument("--n", default="20", help="number of links (range allowed)")
    p.add_argument("--M", required=True, help="layer count (range allowed)")
    p.add_argument("--q", help="node activation probability (range allowed)")
    p.add_argument("--q-power", type=float, help="use q = M^-a")
    p.add_argument("--metric", choices=["cluster", "links", "config", "allzero"], required=True)
    p.add_argument("--node", type=int, help="node for --metric cluster (1-based, default 1)")
    p.add_argument("--config", help="bit string for --metric config")
    add_verify(p)
    p.set_defaults(func=cmd_line_metrics)

    p = sub.add_parser("tree-prob", help="configuration probability on a tree")
    p.add_argument("--graph")
    p.add_argument("--topology")
    p.add_argument("--params")
    p.add_argument("--M")
    p.add_argument("--q")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--config", default="all-ones")
    add_verify(p)
    p.set_defaults(func=cmd_tree_prob)

    p = sub.add_parser("asymptotic", help="large-M limit report (JSON)")
    p.add_argument("--graph")
    p.add_argument("--topology")
    p.add_argument("--scaling")
    p.add_argument("--alpha", default="0")
    p.add_argument("--beta", default="1/2")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--config")
    p.add_argument("--limit-metrics", help="line lengths n for limit cluster/link metrics")
    p.add_argument("--p-c", type=float, help="bond percolation threshold of the graph")
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("simulate", help="Monte Carlo estimates (CSV)")
    p.add_argument("--graph")
    p.add_argument("--topology")
    p.add_argument("--params")
    p.add_argument("--per-layer")
    p.add_argument("--M", type=int)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float)
    p.add_argument("--stat", action="append",
                   help="links | config | cluster:<node> | target:<bits> (repeatable)")
    p.add_argument("--replications", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("feasible", help="feasibility of a configuration on a multilayer clique")
    p.add_argument("--graph")
    p.add_argument("--topology")
    p.add_argument("--complete", type=int, help="use the complete graph on this many nodes")
    p.add_argument("--config", required=True)
    p.add_argument("--M", type=int, required=True)
    p.set_defaults(func=cmd_feasible)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        return args.func(args, out)
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
