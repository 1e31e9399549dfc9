"""Seeded simulation of the multilayer model.

Replications are processed in fixed-size blocks.  Block ``b`` draws from a
generator seeded with ``(seed, b)``, and every tally is an integer sum, so
the report does not depend on how blocks are spread over workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .asymptotic import NonIdenticalParams
from .model import BaseGraph, ModelError, ModelParams, SizeCapError, validate_model

BLOCK = 1024
MAX_CONFIG_LINKS = 20
THREADS_ENV = "MULTILAYER_THREADS"

Params = Union[ModelParams, NonIdenticalParams]


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def component_size(self, x: int) -> int:
        return self.size[self.find(x)]


@dataclass(frozen=True)
class SimConfig:
    replications: int
    seed: int
    config_counts: bool = False
    cluster_nodes: tuple[int, ...] = ()
    active_link_count: bool = False
    multiplicity_links: tuple[int, ...] = ()
    target: tuple[int, ...] | None = None  # configuration whose frequency is tallied
    workers: int | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ModelError("replications must be at least 1")
        if len(self.multiplicity_links) > 3:
            raise ModelError("joint multiplicity table limited to 3 links")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int

    def z_score(self, exact: float) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.mean == exact else math.inf
        return abs(self.mean - exact) / self.stderr


def _estimate(total: int, total_sq: int, n: int) -> Estimate:
    mean = total / n
    if n < 2:
        return Estimate(mean, math.nan, n)
    var = max(0.0, (total_sq - total * total / n) / (n - 1))
    return Estimate(mean, math.sqrt(var / n), n)


@dataclass
class _Tally:
    n: int = 0
    config: dict[int, int] = field(default_factory=dict)
    cluster: dict[int, list[int]] = field(default_factory=dict)  # node -> [sum, sum of squares]
    links: list[int] = field(default_factory=lambda: [0, 0])
    joint: dict[tuple[int, ...], int] = field(default_factory=dict)
    hits: int = 0

    def merge(self, other: "_Tally"):
        self.n += other.n
        for k, v in other.config.items():
            self.config[k] = self.config.get(k, 0) + v
        for k, (s, s2) in other.cluster.items():
            cur = self.cluster.setdefault(k, [0, 0])
            cur[0] += s
            cur[1] += s2
        self.links[0] += other.links[0]
        self.links[1] += other.links[1]
        for k, v in other.joint.items():
            self.joint[k] = self.joint.get(k, 0) + v
        self.hits += other.hits


@dataclass(frozen=True)
class EstimateReport:
    replications: int
    seed: int
    n_links: int
    config: dict[int, int]
    cluster: dict[int, Estimate]
    active_links: Estimate | None
    joint_links: tuple[int, ...]
    joint: dict[tuple[int, ...], int]
    target: Estimate | None = None

    def config_estimate(self, mask: int) -> Estimate:
        """Frequency of configuration ``mask`` with its binomial standard error."""
        if not self.config and self.replications:
            raise ModelError("configuration counts were not collected")
        k = self.config.get(mask, 0)
        return _estimate(k, k, self.replications)

    def joint_table(self, M: int) -> np.ndarray:
        """Empirical joint pmf of the selected multiplicities, shape ``(M+1,) * len(links)``."""
        table = np.zeros((M + 1,) * len(self.joint_links))
        for key, count in self.joint.items():
            table[key] += count
        return table / self.replications


def _layer_probs(g: BaseGraph, params: Params) -> tuple[np.ndarray, np.ndarray, int, int]:
    if isinstance(params, NonIdenticalParams):
        params.check_graph(g)
        return params.p, params.q, params.M, params.K
    validate_model(g, params).raise_for_errors()
    p = np.tile(np.asarray(params.p, dtype=float), (params.M, 1))
    q = np.tile(np.asarray(params.q, dtype=float), (params.M, 1))
    return p, q, params.M, params.K


def sample_multiplicities(g: BaseGraph, p: np.ndarray, q: np.ndarray, size: int,
                          rng: np.random.Generator) -> np.ndarray:
    """``W`` for ``size`` independent networks; ``p`` is (M, |E|), ``q`` is (M, |V|)."""
    M = p.shape[0]
    z = rng.random((size, M, g.n)) < q
    y = rng.random((size, M, g.n_links)) < p
    u, v = g.endpoints
    present = y & z[:, :, u] & z[:, :, v]
    return present.sum(axis=1)


def _run_block(args) -> _Tally:
    g, p, q, K, cfg, block, size = args
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, block])
    w = sample_multiplicities(g, p, q, size, rng)
    x = w >= K
    tally = _Tally(n=size)
    if cfg.config_counts:
        weights = np.left_shift(np.int64(1), np.arange(g.n_links, dtype=np.int64))
        masks = (x.astype(np.int64) * weights).sum(axis=1)
        keys, counts = np.unique(masks, return_counts=True)
        tally.config = {int(k): int(c) for k, c in zip(keys, counts)}
    if cfg.active_link_count:
        nl = x.sum(axis=1).astype(np.int64)
        tally.links = [int(nl.sum()), int((nl * nl).sum())]
    if cfg.cluster_nodes:
        sums = {i: [0, 0] for i in cfg.cluster_nodes}
        for row in x:
            uf = UnionFind(g.n)
            for idx in np.flatnonzero(row):
                uf.union(*g.links[idx])
            for i in cfg.cluster_nodes:
                s = uf.component_size(i)
                sums[i][0] += s
                sums[i][1] += s * s
        tally.cluster = sums
    if cfg.target is not None:
        tally.hits = int(np.all(x == np.asarray(cfg.target, dtype=bool), axis=1).sum())
    if cfg.multiplicity_links:
        sel = w[:, list(cfg.multiplicity_links)]
        keys, counts = np.unique(sel, axis=0, return_counts=True)
        tally.joint = {tuple(int(t) for t in k): int(c) for k, c in zip(keys, counts)}
    return tally


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def simulate(g: BaseGraph, params: Params, cfg: SimConfig) -> EstimateReport:
    """Monte Carlo estimates of the requested statistics."""
    if cfg.config_counts and g.n_links > MAX_CONFIG_LINKS:
        raise SizeCapError(f"configuration counting limited to {MAX_CONFIG_LINKS} links")
    for i in cfg.cluster_nodes:
        if not 0 <= i < g.n:
            raise ModelError(f"unknown node {i}")
    if cfg.target is not None and len(cfg.target) != g.n_links:
        raise ModelError(f"target configuration needs {g.n_links} bits")
    for idx in cfg.multiplicity_links:
        if not 0 <= idx < g.n_links:
            raise ModelError(f"unknown link index {idx}")
    p, q, M, K = _layer_probs(g, params)
    jobs = []
    done = 0
    block = 0
    while done < cfg.replications:
        size = min(BLOCK, cfg.replications - done)
        jobs.append((g, p, q, K, cfg, block, size))
        done += size
        block += 1
    workers = cfg.workers if cfg.workers is not None else default_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(_run_block, jobs))
    else:
        tallies = [_run_block(job) for job in jobs]
    total = _Tally()
    for t in tallies:
        total.merge(t)
    n = total.n
    cluster = {i: _estimate(s, s2, n) for i, (s, s2) in sorted(total.cluster.items())}
    links = _estimate(total.links[0], total.links[1], n) if cfg.active_link_count else None
    target = _estimate(total.hits, total.hits, n) if cfg.target is not None else None
    return EstimateReport(n, cfg.seed, g.n_links, dict(sorted(total.config.items())), cluster, links,
                          tuple(cfg.multiplicity_links), dict(sorted(total.joint.items())), target)


def empirical_multiplicity_joint(g: BaseGraph, params: Params, cfg: SimConfig,
                                 links: Sequence[int]) -> np.ndarray:
    """Empirical joint pmf of ``(W_l)`` over ``links``, shape ``(M+1,) * len(links)``."""
    if not 1 <= len(links) <= 3:
        raise ModelError("choose between 1 and 3 links")
    run = SimConfig(cfg.replications, cfg.seed, multiplicity_links=tuple(links), workers=cfg.workers)
    rep = simulate(g, params, run)
    M = params.M
    return rep.joint_table(M)


def max_deviation(pairs: Iterable[tuple[Estimate, float]]) -> float:
    """Largest ``|estimate - exact|`` in standard-error units."""
    return max((est.z_score(exact) for est, exact in pairs), default=0.0)
