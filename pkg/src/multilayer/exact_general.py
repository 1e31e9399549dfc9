"""Exhaustive computations on small arbitrary graphs.

Configurations are integer bitmasks over link indices.  ``merge_recursion``
builds the ``K = 1`` merged law from the single-layer law; ``brute_force_dist``
enumerates node activity in every layer and is the reference every other
exact method is checked against.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from .model import BaseGraph, ModelError, ModelParams, SizeCapError, validate_model

MAX_LINKS = 20
MAX_NODES = 20
MAX_BRUTE_NODE_LAYERS = 24


@dataclass(frozen=True)
class ConfigDistribution:
    probs: np.ndarray  # length 2^|E|, indexed by configuration mask

    @property
    def n_links(self) -> int:
        return int(self.probs.size).bit_length() - 1

    def __getitem__(self, mask: int) -> float:
        return float(self.probs[mask])

    def total(self) -> float:
        return float(self.probs.sum())


def _node_patterns(n: int, q: Sequence[float]):
    """Masks of all node-activity patterns and their probabilities."""
    patterns = np.arange(1 << n, dtype=np.int64)
    weight = np.ones(1 << n)
    for i in range(n):
        on = (patterns >> i) & 1
        weight *= np.where(on == 1, q[i], 1.0 - q[i])
    return patterns, weight


def _possible_links(g: BaseGraph, patterns: np.ndarray) -> np.ndarray:
    """For each node pattern, the mask of links whose two endpoints are active."""
    out = np.zeros_like(patterns)
    for idx, (u, v) in enumerate(g.links):
        both = ((patterns >> u) & 1) & ((patterns >> v) & 1)
        out |= both << idx
    return out


def _thin(probs: np.ndarray, p: Sequence[float]) -> np.ndarray:
    """Independently clear bit ``l`` with probability ``1 - p[l]`` wherever it is set."""
    probs = probs.copy()
    idx = np.arange(probs.size)
    for link, pl in enumerate(p):
        if pl >= 1.0:
            continue
        bit = 1 << link
        src = idx[(idx & bit) != 0]
        moved = probs[src] * (1.0 - pl)
        probs[src] -= moved
        probs[src ^ bit] += moved
    return probs


def single_layer_dist(g: BaseGraph, params: ModelParams) -> ConfigDistribution:
    """Configuration law of one layer, by enumerating node activity."""
    if g.n_links > MAX_LINKS or g.n > MAX_NODES:
        raise SizeCapError(f"single-layer enumeration limited to {MAX_NODES} nodes and {MAX_LINKS} links")
    patterns, weight = _node_patterns(g.n, params.q)
    masks = _possible_links(g, patterns)
    probs = np.bincount(masks, weights=weight, minlength=1 << g.n_links)
    return ConfigDistribution(_thin(probs, params.p))


def empty_layer_probability_exact(g: BaseGraph, q: Fraction | Sequence[Fraction]) -> Fraction:
    """Rational probability that one layer with ``p = 1`` has no link."""
    if g.n > MAX_NODES:
        raise SizeCapError(f"limited to {MAX_NODES} nodes")
    qs = [Fraction(q)] * g.n if not isinstance(q, (list, tuple)) else [Fraction(v) for v in q]
    total = Fraction(0)
    for pattern in range(1 << g.n):
        if any((pattern >> u) & 1 and (pattern >> v) & 1 for u, v in g.links):
            continue
        w = Fraction(1)
        for i in range(g.n):
            w *= qs[i] if (pattern >> i) & 1 else 1 - qs[i]
        total += w
    return total


def _zeta(a: np.ndarray, n_bits: int) -> np.ndarray:
    """``out[x] = sum_{y subset of x} a[y]``."""
    a = a.copy()
    idx = np.arange(a.size)
    for b in range(n_bits):
        hi = idx[((idx >> b) & 1) == 1]
        a[hi] += a[hi ^ (1 << b)]
    return a


def _moebius(a: np.ndarray, n_bits: int) -> np.ndarray:
    a = a.copy()
    idx = np.arange(a.size)
    for b in range(n_bits):
        hi = idx[((idx >> b) & 1) == 1]
        a[hi] -= a[hi ^ (1 << b)]
    return a


def union_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Law of ``X | Y`` for independent configurations with laws ``a`` and ``b``."""
    n_bits = int(a.size).bit_length() - 1
    return _moebius(_zeta(a, n_bits) * _zeta(b, n_bits), n_bits)


def merge_recursion(q1: ConfigDistribution, M: int) -> ConfigDistribution:
    """Merged (``K = 1``) configuration law of ``M`` i.i.d. layers.

    Each step ORs one more independent layer into the running union.  In
    the subset-sum domain this is a pointwise product, so the ``M`` steps
    reduce to a power.
    """
    if M < 1:
        raise ModelError("M must be positive")
    n_bits = q1.n_links
    z = _zeta(q1.probs, n_bits)
    out = _moebius(z ** M, n_bits)
    return ConfigDistribution(np.clip(out, 0.0, 1.0))


def union_convolve_naive(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Quadratic reference for ``union_convolve``."""
    out = np.zeros_like(a)
    nz_a = np.nonzero(a)[0]
    nz_b = np.nonzero(b)[0]
    for i in nz_a:
        for j in nz_b:
            out[i | j] += a[i] * b[j]
    return out


def _layer_link_counts(g: BaseGraph, q_layers: np.ndarray) -> dict[tuple[int, ...], float]:
    """Law of ``c_l`` = number of layers where both ends of link ``l`` are active."""
    M = q_layers.shape[0]
    if M * g.n > MAX_BRUTE_NODE_LAYERS:
        raise SizeCapError(f"brute force limited to M*|V| <= {MAX_BRUTE_NODE_LAYERS}")
    states: dict[tuple[int, ...], float] = {(0,) * g.n_links: 1.0}
    for m in range(M):
        patterns, weight = _node_patterns(g.n, q_layers[m])
        keep = weight > 0.0
        patterns, weight = patterns[keep], weight[keep]
        layer: dict[tuple[int, ...], float] = defaultdict(float)
        for pat, w in zip(patterns.tolist(), weight.tolist()):
            key = tuple(((pat >> u) & 1) & ((pat >> v) & 1) for u, v in g.links)
            layer[key] += w
        nxt: dict[tuple[int, ...], float] = defaultdict(float)
        for c, wc in states.items():
            for d, wd in layer.items():
                nxt[tuple(a + b for a, b in zip(c, d))] += wc * wd
        states = nxt
    return states


def _tail(c: int, p: float, K: int) -> float:
    return sum(comb(c, w) * p ** w * (1.0 - p) ** (c - w) for w in range(K, c + 1))


def _product_law(on: Sequence[float]) -> np.ndarray:
    out = np.ones(1)
    for t in on:  # link 0 is bit 0, so it must vary fastest
        out = np.concatenate([out * (1.0 - t), out * t])
    return out


def _brute(g: BaseGraph, q_layers: np.ndarray, p: Sequence[float], K: int) -> ConfigDistribution:
    if g.n_links > MAX_LINKS:
        raise SizeCapError(f"brute force limited to {MAX_LINKS} links")
    probs = np.zeros(1 << g.n_links)
    for counts, w in _layer_link_counts(g, q_layers).items():
        probs += w * _product_law([_tail(c, p[idx], K) for idx, c in enumerate(counts)])
    return ConfigDistribution(probs)


def brute_force_dist(g: BaseGraph, params: ModelParams) -> ConfigDistribution:
    """Exact merged law for any ``K`` by enumerating node activity in every layer.

    Given which nodes are active in which layers, link ``l`` is present in a
    ``Binomial(c_l, p_l)`` number of layers independently of other links, so
    thinning is integrated in closed form.
    """
    validate_model(g, params).raise_for_errors()
    q_layers = np.tile(np.asarray(params.q, dtype=float), (params.M, 1))
    return _brute(g, q_layers, params.p, params.K)


def conditioned_brute_force(g: BaseGraph, params: ModelParams, node: int, m: int) -> ConfigDistribution:
    """Merged law given ``node`` is active in exactly ``m`` layers (a fixed set of them)."""
    validate_model(g, params).raise_for_errors()
    if not 0 <= m <= params.M:
        raise ModelError(f"m must lie in 0..{params.M}")
    if not 0 <= node < g.n:
        raise ModelError(f"unknown node {node}")
    if params.q[node] == 1.0 and m < params.M:
        raise ModelError("conditioning event has probability zero")
    q_layers = np.tile(np.asarray(params.q, dtype=float), (params.M, 1))
    q_layers[:m, node] = 1.0
    q_layers[m:, node] = 0.0
    return _brute(g, q_layers, params.p, params.K)


def count_independent_sets(g: BaseGraph) -> int:
    """Number of independent sets of ``g``, the empty set included."""
    if g.n > 24:
        raise SizeCapError("independent-set counting limited to 24 nodes")
    nbr = [0] * g.n
    for u, v in g.links:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    memo: dict[int, int] = {}

    def count(avail: int) -> int:
        if avail == 0:
            return 1
        if avail in memo:
            return memo[avail]
        v = (avail & -avail).bit_length() - 1
        rest = avail & ~(1 << v)
        res = count(rest) + count(rest & ~nbr[v])
        memo[avail] = res
        return res

    return count((1 << g.n) - 1)
