"""Leaves-to-root dynamic program for configuration probabilities on trees.

For node ``v`` let ``A_v`` be the number of layers it is active in and
``f_v[m] = P[A_v = m, links below v configured as x]``.  Then

    f_v[m] = B(m; M, q_v) * prod_{w in ch(v)} g_vw[m]
    g_vw[m] = sum_k f_w[k] * T_x[m, k]

where ``T_x[m, k]`` is the probability that link ``(v, w)`` ends in state
``x_vw`` given ``A_v = m`` and ``A_w = k``: the number of shared layers is
hypergeometric and the link multiplicity given ``j`` shared layers is
``Binomial(j, p_vw)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom, hypergeom

from .model import BaseGraph, LinkConfiguration, ModelError, ModelParams, SizeCapError, validate_model

# transfer matrices up to this many entries are cached whole
_CACHE_ENTRIES = 4_000_000


@lru_cache(maxsize=8)
def log_factorials(M: int) -> np.ndarray:
    """``log(k!)`` for ``k = 0..M``."""
    return gammaln(np.arange(M + 1, dtype=float) + 1.0)


def _log_comb(lf: np.ndarray, n, k):
    return lf[n] - lf[k] - lf[n - k]


def binom_pmf(m: int, M: int, q: float) -> float:
    """``C(M, m) q^m (1-q)^(M-m)``."""
    if not 0 <= m <= M:
        return 0.0
    return float(binom_pmf_vector(M, q)[m])


def binom_pmf_vector(M: int, q: float) -> np.ndarray:
    """Binomial(M, q) pmf on ``0..M``.

    scipy's saddle-point evaluation keeps the total within a few ulps of 1
    even at ``M = 10^5``, where a log-gamma construction drifts by ~1e-11.
    """
    if q <= 0.0:
        out = np.zeros(M + 1)
        out[0] = 1.0
        return out
    if q >= 1.0:
        out = np.zeros(M + 1)
        out[M] = 1.0
        return out
    return binom.pmf(np.arange(M + 1), M, q)


def hypergeom_pmf(j: int, M: int, m: int, k: int) -> float:
    """P[j shared layers] when ``m`` and ``k`` layers are drawn at random from ``M``."""
    if j < 0 or j > min(m, k) or k - j > M - m or not (0 <= m <= M and 0 <= k <= M):
        return 0.0
    return float(hypergeom.pmf(j, M, m, k))


def binom_ccdf(K: int, j: int, p: float) -> float:
    """``P[Binomial(j, p) >= K]``."""
    if K <= 0:
        return 1.0
    if K > j:
        return 0.0
    pmf = binom_pmf_vector(j, p)
    return float(min(1.0, pmf[K:].sum()))


def _hypergeom_grid(M: int, j: int, rows: np.ndarray) -> np.ndarray:
    """``H(j; M, m, k)`` for ``m`` in ``rows`` and every ``k``."""
    lf = log_factorials(M)
    m = rows[:, None]
    k = np.arange(M + 1)[None, :]
    valid = (m >= j) & (k >= j) & (k - j <= M - m)
    mm = np.where(valid, m, j)
    kk = np.where(valid, k, j)
    logh = _log_comb(lf, mm, j) + _log_comb(lf, M - mm, kk - j) - _log_comb(lf, M, kk)
    return np.where(valid, np.exp(logh), 0.0)


def _inactive_given_shared(M: int, K: int, p: float) -> np.ndarray:
    """``P[Binomial(j, p) < K]`` for ``j = 0..J``, truncated once it is negligible."""
    out = []
    for j in range(M + 1):
        v = 1.0 - binom_ccdf(K, j, p)
        out.append(v)
        if j >= K and v < 1e-18:
            break
    return np.asarray(out)


def _inactive_rows(M: int, K: int, p: float, rows: np.ndarray) -> np.ndarray:
    phi0 = _inactive_given_shared(M, K, p)
    out = np.zeros((len(rows), M + 1))
    for j, w in enumerate(phi0):
        if w > 0.0:
            out += w * _hypergeom_grid(M, j, rows)
    return out


@lru_cache(maxsize=32)
def _cached_inactive(M: int, K: int, p: float) -> np.ndarray:
    T = _inactive_rows(M, K, p, np.arange(M + 1))
    T.setflags(write=False)
    return T


def link_transfer(M: int, K: int, p: float, x_vw: int, f_child: np.ndarray) -> np.ndarray:
    """``g[m] = sum_k f_child[k] * P[X_vw = x_vw | A_v = m, A_w = k]`` for all ``m``."""
    if (M + 1) ** 2 <= _CACHE_ENTRIES:
        T0 = _cached_inactive(M, K, float(p))
        g0 = T0 @ f_child
    else:
        g0 = np.empty(M + 1)
        chunk = max(1, _CACHE_ENTRIES // (M + 1))
        for start in range(0, M + 1, chunk):
            rows = np.arange(start, min(M + 1, start + chunk))
            g0[rows] = _inactive_rows(M, K, float(p), rows) @ f_child
    if x_vw:
        return np.clip(f_child.sum() - g0, 0.0, None)
    return g0


def edge_factor(m: int, child_dist: np.ndarray, x_vw: int, p_vw: float, M: int, K: int) -> float:
    """Single entry ``g_vw[m]`` via the explicit double sum over ``k`` and ``j``."""
    total = 0.0
    for k in range(M + 1):
        fk = child_dist[k]
        if fk == 0.0:
            continue
        inner = 0.0
        for j in range(min(m, k) + 1):
            h = hypergeom_pmf(j, M, m, k)
            if h == 0.0:
                continue
            on = binom_ccdf(K, j, p_vw)
            inner += h * (on if x_vw else 1.0 - on)
        total += fk * inner
    return total


@dataclass(frozen=True)
class RootedTree:
    base: BaseGraph
    root: int
    parent: tuple[int, ...]
    parent_link: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    order: tuple[int, ...]  # leaves first

    @classmethod
    def from_graph(cls, g: BaseGraph, root: int = 0) -> "RootedTree":
        if not g.is_tree():
            raise ModelError("graph is not a tree")
        if not 0 <= root < g.n:
            raise ModelError(f"root {root} is not a node")
        link_of = {}
        for idx, (u, v) in enumerate(g.links):
            link_of[(u, v)] = link_of[(v, u)] = idx
        parent = [-1] * g.n
        plink = [-1] * g.n
        children: list[list[int]] = [[] for _ in range(g.n)]
        seen = [False] * g.n
        seen[root] = True
        bfs = []
        queue = deque([root])
        while queue:
            v = queue.popleft()
            bfs.append(v)
            for w in g.adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    plink[w] = link_of[(v, w)]
                    children[v].append(w)
                    queue.append(w)
        return cls(g, root, tuple(parent), tuple(plink), tuple(map(tuple, children)), tuple(reversed(bfs)))


def node_layer_dists(t: RootedTree, x: LinkConfiguration, params: ModelParams) -> dict[int, np.ndarray]:
    """``f_v[m]`` for every node, computed leaves first."""
    M, K = params.M, params.K
    if len(x) != t.base.n_links:
        raise ModelError(f"configuration has {len(x)} bits, tree has {t.base.n_links} links")
    f: dict[int, np.ndarray] = {}
    for v in t.order:
        fv = binom_pmf_vector(M, params.q[v])
        for w in t.children[v]:
            link = t.parent_link[w]
            fv = fv * link_transfer(M, K, params.p[link], x.bits[link], f[w])
        f[v] = fv
    return f


def tree_config_prob(t: RootedTree | BaseGraph, x: LinkConfiguration, params: ModelParams) -> float:
    """Probability that the merged network is in configuration ``x``."""
    if isinstance(t, BaseGraph):
        t = RootedTree.from_graph(t)
    validate_model(t.base, params).raise_for_errors()
    f = node_layer_dists(t, x, params)
    return float(min(1.0, max(0.0, f[t.root].sum())))


def tree_config_distribution(t: RootedTree | BaseGraph, params: ModelParams) -> np.ndarray:
    """Probabilities of all ``2^|E|`` configurations, indexed by bitmask."""
    if isinstance(t, BaseGraph):
        t = RootedTree.from_graph(t)
    n_links = t.base.n_links
    if n_links > 20:
        raise SizeCapError("full distribution limited to 20 links")
    return np.array([tree_config_prob(t, LinkConfiguration.from_mask(mask, n_links), params)
                     for mask in range(1 << n_links)])
