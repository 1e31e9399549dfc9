"""Domain types for stochastic multilayer networks.

A base graph ``G`` is sampled ``M`` times.  In each layer every node is
active independently with probability ``q_i`` and every link survives
thinning independently with probability ``p_l``; a link is present in a
layer when it survives and both endpoints are active.  A link is active in
the merged network when it is present in at least ``K`` layers.

Links are addressed by their index in ``BaseGraph.links``; configuration
bit ``l`` of an integer mask is the state of link ``l``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

MAX_ENUM_LINKS = 64


class ModelError(ValueError):
    """Invalid graph, parameters or configuration."""


class SizeCapError(ModelError):
    """Instance too large for an exhaustive method."""


@dataclass(frozen=True)
class BaseGraph:
    """Undirected simple graph on nodes ``0..n-1``."""

    n: int
    links: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("graph needs at least one node")
        links = tuple((int(u), int(v)) for u, v in self.links)
        seen = set()
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in links:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ModelError(f"link ({u}, {v}) references a node outside 0..{self.n - 1}")
            if u == v:
                raise ModelError(f"self-loop at node {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ModelError(f"duplicate link {key}")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in adj))

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], n: int | None = None) -> "BaseGraph":
        edges = [tuple(e) for e in edges]
        if n is None:
            n = 1 + max((max(e) for e in edges), default=0)
        return cls(n, tuple(edges))

    @classmethod
    def path(cls, n_links: int) -> "BaseGraph":
        """Line of ``n_links`` links in series, link ``j`` joining nodes ``j`` and ``j+1``."""
        return cls(n_links + 1, tuple((j, j + 1) for j in range(n_links)))

    @classmethod
    def complete(cls, n: int) -> "BaseGraph":
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.links:
            return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp)
        arr = np.asarray(self.links, dtype=np.intp)
        return arr[:, 0], arr[:, 1]

    def link_index(self, u: int, v: int) -> int:
        for idx, (a, b) in enumerate(self.links):
            if (a, b) == (u, v) or (a, b) == (v, u):
                return idx
        raise ModelError(f"no link between {u} and {v}")

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                u = queue.popleft()
                comp.append(u)
                for w in self.adjacency[u]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
            out.append(comp)
        return out

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def is_tree(self) -> bool:
        return self.n_links == self.n - 1 and self.is_connected()

    def is_complete(self) -> bool:
        return self.n_links == self.n * (self.n - 1) // 2


@dataclass(frozen=True)
class ModelParams:
    """Layer count ``M``, threshold ``K``, per-link ``p`` and per-node ``q``."""

    M: int
    K: int
    p: tuple[float, ...]
    q: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))

    @classmethod
    def uniform(cls, g: BaseGraph, M: int, K: int = 1, p: float = 1.0, q: float = 1.0) -> "ModelParams":
        return cls(M, K, (p,) * g.n_links, (q,) * g.n)

    def with_(self, **changes) -> "ModelParams":
        kw = dict(M=self.M, K=self.K, p=self.p, q=self.q)
        kw.update(changes)
        return ModelParams(**kw)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_for_errors(self):
        if self.errors:
            raise ModelError("; ".join(self.errors))


def validate_model(g: BaseGraph, params: ModelParams) -> ValidationReport:
    """Check ``params`` against ``g``.

    Structural graph problems are rejected when the ``BaseGraph`` is built;
    this reports parameter violations and warns about disconnected graphs.
    """
    rep = ValidationReport()
    if params.M < 1:
        rep.errors.append(f"M must be a positive integer, got {params.M}")
    if params.K < 1:
        rep.errors.append(f"K must be at least 1, got {params.K}")
    elif params.K > params.M:
        rep.errors.append(f"K exceeds M ({params.K} > {params.M})")
    if len(params.p) != g.n_links:
        rep.errors.append(f"expected {g.n_links} link probabilities, got {len(params.p)}")
    if len(params.q) != g.n:
        rep.errors.append(f"expected {g.n} node probabilities, got {len(params.q)}")
    for idx, v in enumerate(params.p):
        if not 0.0 < v <= 1.0:
            rep.errors.append(f"p for link {g.links[idx] if idx < g.n_links else idx} must lie in (0, 1], got {v}")
    for i, v in enumerate(params.q):
        if not 0.0 < v <= 1.0:
            rep.errors.append(f"q for node {i} must lie in (0, 1], got {v}")
    if not g.is_connected():
        rep.warnings.append("base graph is disconnected")
        log.warning("base graph is disconnected")
    return rep


@dataclass(frozen=True)
class LinkConfiguration:
    """0/1 state per link, aligned with ``BaseGraph.links``."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ModelError("configuration bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_mask(cls, mask: int, n_links: int) -> "LinkConfiguration":
        return cls(tuple((mask >> idx) & 1 for idx in range(n_links)))

    @classmethod
    def from_string(cls, s: str) -> "LinkConfiguration":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ModelError(f"bad configuration string {s!r}")
        return cls(tuple(int(c) for c in s))

    @classmethod
    def ones(cls, n_links: int) -> "LinkConfiguration":
        return cls((1,) * n_links)

    @classmethod
    def zeros(cls, n_links: int) -> "LinkConfiguration":
        return cls((0,) * n_links)

    @property
    def mask(self) -> int:
        return sum(b << idx for idx, b in enumerate(self.bits))

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class LayerSample:
    """One realised layer: node activity, thinning survivors and present links."""

    active_nodes: np.ndarray
    surviving_links: np.ndarray
    layer_links: np.ndarray

    @classmethod
    def from_activity(cls, g: BaseGraph, active_nodes, surviving_links) -> "LayerSample":
        z = np.asarray(active_nodes, dtype=bool)
        y = np.asarray(surviving_links, dtype=bool)
        if z.shape != (g.n,) or y.shape != (g.n_links,):
            raise ModelError("layer sample dimensions do not match the graph")
        u, v = g.endpoints
        return cls(z, y, y & z[u] & z[v])


def multiplicities(layers: Sequence[LayerSample]) -> np.ndarray:
    """Number of layers containing each link."""
    if not layers:
        raise ModelError("need at least one layer")
    shape = layers[0].layer_links.shape
    if any(layer.layer_links.shape != shape for layer in layers):
        raise ModelError("layers disagree on the number of links")
    return np.sum([layer.layer_links for layer in layers], axis=0, dtype=np.int64)


def merge_layers(layers: Sequence[LayerSample], K: int) -> LinkConfiguration:
    """Active links are those present in at least ``K`` of the layers."""
    if not 1 <= K <= len(layers):
        raise ModelError(f"K must lie in 1..{len(layers)}, got {K}")
    w = multiplicities(layers)
    return LinkConfiguration(tuple((w >= K).astype(int)))


# ---------------------------------------------------------------- file formats


def _lines(source: str | Path) -> list[list[str]]:
    text = Path(source).read_text() if isinstance(source, Path) else source
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line.split())
    return out


def parse_graph(source: str | Path) -> BaseGraph:
    """Read ``n m`` followed by ``m`` lines ``u v`` (0-based node ids)."""
    rows = _lines(source)
    if not rows or len(rows[0]) != 2:
        raise ModelError("graph file must start with 'n m'")
    n, m = (int(t) for t in rows[0])
    edges = rows[1:]
    if len(edges) != m:
        raise ModelError(f"graph header announces {m} links but {len(edges)} follow")
    try:
        pairs = [(int(a), int(b)) for a, b in edges]
    except ValueError as exc:
        raise ModelError(f"malformed link line: {exc}") from None
    return BaseGraph(n, tuple(pairs))


def parse_params(source: str | Path, g: BaseGraph) -> ModelParams:
    """Read ``M``, ``K``, uniform ``p``/``q`` and ``p u v value`` / ``q u value`` overrides."""
    M = K = None
    p = [1.0] * g.n_links
    q = [1.0] * g.n
    for row in _lines(source):
        key, args = row[0], row[1:]
        try:
            if key == "M" and len(args) == 1:
                M = int(args[0])
            elif key == "K" and len(args) == 1:
                K = int(args[0])
            elif key == "p" and len(args) == 1:
                p = [float(args[0])] * g.n_links
            elif key == "q" and len(args) == 1:
                q = [float(args[0])] * g.n
            elif key == "p" and len(args) == 3:
                p[g.link_index(int(args[0]), int(args[1]))] = float(args[2])
            elif key == "q" and len(args) == 2:
                node = int(args[0])
                if not 0 <= node < g.n:
                    raise ModelError(f"q override for unknown node {node}")
                q[node] = float(args[1])
            else:
                raise ModelError(f"unrecognised parameter line: {' '.join(row)}")
        except ValueError as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"bad parameter line {' '.join(row)!r}: {exc}") from None
    if M is None:
        raise ModelError("parameter file must set M")
    return ModelParams(M, 1 if K is None else K, tuple(p), tuple(q))
