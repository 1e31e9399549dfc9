"""Large-``M`` limits: Poisson multiplicities and asymptotic link independence.

With ``p_l ~ c_l M^-alpha_l`` and ``q_i ~ d_i M^-beta_i`` the multiplicity of
link ``l = (i, j)`` tends to Poisson(``lambda_l``) where ``lambda_l`` is 0,
``c_l d_i d_j`` or infinite as ``alpha_l + beta_i + beta_j`` is above, at or
below 1.  Multiplicities become independent provided no node with
``beta = 1`` touches two critical links.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.stats import binom, poisson

from .model import BaseGraph, LinkConfiguration, ModelError, _lines

Exponent = Union[Fraction, int, str, float]


class RegularityError(ModelError):
    """Scaling violates the condition required for asymptotic independence."""


class _Infinite:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFINITE"

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()
Rate = Union[float, _Infinite]


def as_exponent(v: Exponent) -> Fraction:
    """Exact rational exponent; floats are read through their decimal repr."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


@dataclass(frozen=True)
class ScalingSpec:
    alpha: tuple[Fraction, ...]  # per link
    c: tuple[float, ...]
    beta: tuple[Fraction, ...]  # per node
    d: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(as_exponent(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(as_exponent(b) for b in self.beta))
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        if any(a < 0 for a in self.alpha + self.beta):
            raise ModelError("scaling exponents must be non-negative")
        if any(v <= 0 for v in self.c + self.d):
            raise ModelError("scaling coefficients must be positive")

    @classmethod
    def uniform(cls, g: BaseGraph, alpha: Exponent = 0, beta: Exponent = Fraction(1, 2),
                c: float = 1.0, d: float = 1.0) -> "ScalingSpec":
        return cls((alpha,) * g.n_links, (c,) * g.n_links, (beta,) * g.n, (d,) * g.n)

    def check_covers(self, g: BaseGraph):
        if len(self.alpha) != g.n_links or len(self.c) != g.n_links:
            raise ModelError(f"scaling must give alpha and c for all {g.n_links} links")
        if len(self.beta) != g.n or len(self.d) != g.n:
            raise ModelError(f"scaling must give beta and d for all {g.n} nodes")

    def at(self, M: int) -> tuple[np.ndarray, np.ndarray]:
        """Finite-``M`` parameters ``p = c M^-alpha``, ``q = d M^-beta``."""
        p = np.array([c * M ** -float(a) for c, a in zip(self.c, self.alpha)])
        q = np.array([d * M ** -float(b) for d, b in zip(self.d, self.beta)])
        return p, q


@dataclass(frozen=True)
class Violation:
    node: int
    beta: Fraction
    critical_neighbours: tuple[int, ...]

    def __str__(self):
        return (f"node {self.node}: beta = {self.beta} is not below 1 but the node touches "
                f"{len(self.critical_neighbours)} critical links (neighbours {list(self.critical_neighbours)})")


@dataclass(frozen=True)
class PoissonLimit:
    rates: tuple[Rate, ...]
    violations: tuple[Violation, ...] = field(default=())

    @classmethod
    def direct(cls, rates: Sequence[float | _Infinite]) -> "PoissonLimit":
        out = []
        for r in rates:
            if r is INFINITE or (isinstance(r, float) and math.isinf(r)):
                out.append(INFINITE)
            elif r < 0:
                raise ModelError("Poisson rates must be non-negative")
            else:
                out.append(float(r))
        return cls(tuple(out))


def _critical_sum(spec: ScalingSpec, g: BaseGraph, idx: int) -> Fraction:
    u, v = g.links[idx]
    return spec.alpha[idx] + spec.beta[u] + spec.beta[v]


def poisson_lambda(spec: ScalingSpec, g: BaseGraph) -> PoissonLimit:
    spec.check_covers(g)
    rates: list[Rate] = []
    for idx, (u, v) in enumerate(g.links):
        s = _critical_sum(spec, g, idx)
        if s > 1:
            rates.append(0.0)
        elif s == 1:
            rates.append(spec.c[idx] * spec.d[u] * spec.d[v])
        else:
            rates.append(INFINITE)
    return PoissonLimit(tuple(rates), tuple(check_regularity(spec, g)))


def check_regularity(spec: ScalingSpec, g: BaseGraph) -> list[Violation]:
    """Nodes with ``beta >= 1`` that touch two or more critical links."""
    spec.check_covers(g)
    crit: list[list[int]] = [[] for _ in range(g.n)]
    for idx, (u, v) in enumerate(g.links):
        if _critical_sum(spec, g, idx) == 1:
            crit[u].append(v)
            crit[v].append(u)
    return [Violation(k, spec.beta[k], tuple(crit[k]))
            for k in range(g.n) if len(crit[k]) >= 2 and spec.beta[k] >= 1]


def active_probability(rate: Rate, K: int) -> float:
    """``P[Poisson(rate) >= K]``; an infinite rate gives 1."""
    if rate is INFINITE:
        return 1.0
    if rate == 0.0:
        return 0.0 if K >= 1 else 1.0
    return float(poisson.sf(K - 1, rate))


def limit_config_prob(x: LinkConfiguration, limit: PoissonLimit, K: int) -> float:
    """Limiting probability of ``x`` as a product of independent link states."""
    if limit.violations:
        raise RegularityError("; ".join(map(str, limit.violations)))
    if len(x) != len(limit.rates):
        raise ModelError("configuration and limit disagree on the number of links")
    out = 1.0
    for bit, rate in zip(x.bits, limit.rates):
        pa = active_probability(rate, K)
        out *= pa if bit else 1.0 - pa
    return out


def limit_multiplicity_prob(w: Sequence[int], limit: PoissonLimit) -> float:
    """Limiting ``P[W_l = w_l for all l]`` (finite rates only)."""
    if limit.violations:
        raise RegularityError("; ".join(map(str, limit.violations)))
    out = 1.0
    for wl, rate in zip(w, limit.rates):
        if rate is INFINITE:
            return 0.0
        out *= float(poisson.pmf(wl, rate))
    return out


class Regime(enum.Enum):
    EMPTY = "empty"
    FULL = "full"
    ERDOS_RENYI_LIKE = "erdos-renyi-like"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    link_prob: float


def trichotomy(alpha: Exponent, beta: Exponent, c: float = 1.0, d: float = 1.0, K: int = 1) -> RegimeReport:
    """Limit of the merged network under uniform scaling."""
    s = as_exponent(alpha) + 2 * as_exponent(beta)
    if s > 1:
        return RegimeReport(Regime.EMPTY, 0.0)
    if s < 1:
        return RegimeReport(Regime.FULL, 1.0)
    return RegimeReport(Regime.ERDOS_RENYI_LIKE, active_probability(c * d * d, K))


# bond percolation threshold of the square lattice
SQUARE_LATTICE_PC = 0.5


def giant_component_threshold(p_c: float = SQUARE_LATTICE_PC) -> float:
    """Smallest ``d`` (with ``q = d / sqrt(M)``) for which the limit link probability exceeds ``p_c``."""
    if not 0.0 < p_c < 1.0:
        raise ModelError(f"p_c must lie in (0, 1), got {p_c}")
    return math.sqrt(-math.log1p(-p_c))


@dataclass(frozen=True)
class LineLimitMetrics:
    expected_cluster_size: float
    expected_active_links: float
    link_prob: float


def limit_cluster_metrics(n: int, rate: Rate, K: int = 1) -> LineLimitMetrics:
    """Line metrics when links are independent with the limiting activity probability."""
    if n < 1:
        raise ModelError("n must be at least 1")
    pa = active_probability(rate, K)
    if pa >= 1.0:
        cluster = float(n + 1)
    else:
        cluster = (1.0 - pa ** (n + 1)) / (1.0 - pa)
    return LineLimitMetrics(cluster, n * pa, pa)


@dataclass(frozen=True)
class NonIdenticalParams:
    """Per-layer probabilities: ``p[m, l]`` and ``q[m, i]`` for ``m = 0..M-1``."""

    p: np.ndarray
    q: np.ndarray
    K: int = 1

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.p, dtype=float))
        q = np.atleast_2d(np.asarray(self.q, dtype=float))
        if p.shape[0] != q.shape[0]:
            raise ModelError("p and q must list the same number of layers")
        if np.any((p <= 0) | (p > 1)) or np.any((q <= 0) | (q > 1)):
            raise ModelError("per-layer probabilities must lie in (0, 1]")
        if not 1 <= self.K <= p.shape[0]:
            raise ModelError("K must lie in 1..M")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def M(self) -> int:
        return self.p.shape[0]

    def check_graph(self, g: BaseGraph):
        if self.p.shape[1] != g.n_links or self.q.shape[1] != g.n:
            raise ModelError("per-layer parameters do not match the graph")


@dataclass(frozen=True)
class Diagnostics:
    sum_r: np.ndarray  # per link, expected multiplicity
    max_r: np.ndarray  # per link, largest single-layer presence probability
    overlap: dict[tuple[int, int], float]  # link pairs sharing an endpoint -> expected co-presences


def nonidentical_diagnostics(params: NonIdenticalParams, g: BaseGraph) -> Diagnostics:
    params.check_graph(g)
    u, v = g.endpoints
    r = params.p * params.q[:, u] * params.q[:, v]
    overlap = {}
    for a in range(g.n_links):
        for b in range(a + 1, g.n_links):
            shared = set(g.links[a]) & set(g.links[b])
            if not shared:
                continue
            (s,) = shared
            # shared endpoint enters once
            overlap[(a, b)] = float(np.sum(r[:, a] * r[:, b] / params.q[:, s]))
    return Diagnostics(r.sum(axis=0), r.max(axis=0), overlap)


def total_variation(a: np.ndarray, b: np.ndarray) -> float:
    n = max(len(a), len(b))
    a = np.pad(np.asarray(a, dtype=float), (0, n - len(a)))
    b = np.pad(np.asarray(b, dtype=float), (0, n - len(b)))
    return 0.5 * float(np.abs(a - b).sum())


def multiplicity_poisson_tv(M: int, rate: float) -> float:
    """TV distance between Binomial(M, rate/M) and Poisson(rate), tail included."""
    k = np.arange(M + 1)
    b = binom.pmf(k, M, rate / M)
    pz = poisson.pmf(k, rate)
    return 0.5 * float(np.abs(b - pz).sum() + poisson.sf(M, rate))


def three_node_empty_prob(M: int, q1: float, q2: float, q3: float, p12: float, p23: float) -> float:
    """``P[W_12 = W_23 = 0]`` on the line 1-2-3 with ``M`` i.i.d. layers."""
    return (1.0 - q2 + q2 * (1.0 - q1 * p12) * (1.0 - q3 * p23)) ** M


def parse_scaling(source: str | Path, g: BaseGraph) -> ScalingSpec:
    """Key-value scaling file.

    ``alpha a`` / ``c v`` / ``beta b`` / ``d v`` set uniform values;
    ``alpha u v a``, ``c u v v``, ``beta i b`` and ``d i v`` override single
    links and nodes.  Exponents may be written as fractions such as ``1/2``.
    """
    alpha: list[Exponent] = [0] * g.n_links
    c = [1.0] * g.n_links
    beta: list[Exponent] = [Fraction(1, 2)] * g.n
    d = [1.0] * g.n
    for row in _lines(source):
        key, args = row[0], row[1:]
        try:
            if key in ("alpha", "c") and len(args) == 1:
                val = as_exponent(args[0]) if key == "alpha" else float(Fraction(args[0]))
                (alpha if key == "alpha" else c)[:] = [val] * g.n_links
            elif key in ("beta", "d") and len(args) == 1:
                val = as_exponent(args[0]) if key == "beta" else float(Fraction(args[0]))
                (beta if key == "beta" else d)[:] = [val] * g.n
            elif key in ("alpha", "c") and len(args) == 3:
                idx = g.link_index(int(args[0]), int(args[1]))
                if key == "alpha":
                    alpha[idx] = as_exponent(args[2])
                else:
                    c[idx] = float(Fraction(args[2]))
            elif key in ("beta", "d") and len(args) == 2:
                node = int(args[0])
                if not 0 <= node < g.n:
                    raise ModelError(f"unknown node {node}")
                if key == "beta":
                    beta[node] = as_exponent(args[1])
                else:
                    d[node] = float(Fraction(args[1]))
            else:
                raise ModelError(f"unrecognised scaling line: {' '.join(row)}")
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"bad scaling line {' '.join(row)!r}: {exc}") from None
    return ScalingSpec(tuple(alpha), tuple(c), tuple(beta), tuple(d))
