"""Closed forms for the line network (uniform ``q``, ``p = 1``, ``K = 1``).

Nodes are numbered ``1..n+1`` and link ``e_j`` joins nodes ``j`` and
``j+1``.  Quantities "given m" condition on the right-most node ``n+1``
being active in exactly ``m`` layers.

Most formulas are written in terms of

    A_k = 1 - (k-1) q^2 + P_k(q),   k >= 1,

for which ``A_k^M`` is the probability that a line of ``k-1`` links has no
active link.  Configuration vectors are 0/1 sequences ``(x_1, ..., x_n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact_tree import binom_pmf_vector
from .model import LinkConfiguration, ModelError


@dataclass(frozen=True)
class LineSpec:
    n: int
    q: float
    M: int

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("line needs at least one link")
        if self.M < 1:
            raise ModelError("M must be positive")
        if not 0.0 < self.q <= 1.0:
            raise ModelError(f"q must lie in (0, 1], got {self.q}")

    def with_n(self, n: int) -> "LineSpec":
        return LineSpec(n, self.q, self.M)


@dataclass(frozen=True)
class PolyPTable:
    q: float
    values: tuple  # P_1 .. P_N

    def __getitem__(self, k: int):
        if k < 1:
            raise IndexError(k)
        return self.values[k - 1]

    def __len__(self):
        return len(self.values)


def poly_p_table(q, N: int) -> PolyPTable:
    """``P_1..P_N`` with ``P_1 = P_2 = 0``.  Works for floats and ``Fraction``."""
    if N < 2:
        raise ModelError("N must be at least 2")
    qb = 1 - q
    vals = [q * 0, q * 0]
    for k in range(3, N + 1):
        vals.append(qb * vals[-1] + q * qb * vals[-2] + q ** 3 + (k - 3) * q ** 4)
    return PolyPTable(q, tuple(vals))


def _as_bits(x) -> tuple[int, ...]:
    if isinstance(x, LinkConfiguration):
        return x.bits
    if isinstance(x, str):
        return LinkConfiguration.from_string(x).bits
    return tuple(int(b) for b in x)


class _Line:
    """Shared tables for one ``(q, M)`` and lines of up to ``n`` links."""

    def __init__(self, spec: LineSpec, n: int | None = None):
        self.spec = spec
        self.n = spec.n if n is None else n
        q, M = spec.q, spec.M
        self.q, self.M = q, M
        P = poly_p_table(q, max(self.n + 1, 2))
        # A[k] for k = 1..n+1; A[0] unused
        self.A = np.array([np.nan] + [1.0 - (k - 1) * q * q + P[k] for k in range(1, self.n + 2)])
        with np.errstate(divide="ignore"):
            self.AM = self.A ** M
        self.m = np.arange(M + 1)
        self.qbm = (1.0 - q) ** self.m
        self.weights = binom_pmf_vector(M, q)

    def q0(self, k: int) -> float:
        """Unconditional probability that a line of ``k`` links is empty."""
        return 1.0 if k == 0 else float(self.AM[k + 1])

    def q0_given(self, k: int) -> np.ndarray:
        """Same, given node ``k+1`` is in ``m`` layers, for every ``m``."""
        if k == 0:
            return np.ones(self.M + 1)
        if k == 1:
            return self.qbm.copy()
        m, M = self.m, self.M
        return self.qbm * self.A[k - 1] ** m * self.A[k] ** (M - m)

    def h(self, bits: Sequence[int]) -> np.ndarray:
        n = len(bits)
        s = [0] + [1 - 2 * b for b in bits]  # s[l] = xbar_l - x_l, 1-based
        h = np.zeros(n + 1)
        h[0] = 1.0
        for j in range(1, n + 1):
            if not bits[j - 1]:
                continue
            acc, prod = 0.0, 1.0
            for r in range(j - 1, -1, -1):
                acc += self.AM[j - r] * h[r] * prod
                prod *= s[r] if r >= 1 else 1
            h[j] = acc
        return h

    def h_hat(self, b: int, n: int) -> np.ndarray:
        """Coefficients for the configuration ``(b, 1, 1, ..., 1)``."""
        out = np.zeros(n + 1)
        out[0] = 1.0
        if n >= 1:
            out[1] = b
        for j in range(2, n + 1):
            acc = (-1) ** (j - b) * self.AM[j]
            for r in range(1, j):
                acc += (-1) ** (j - r - 1) * self.AM[j - r] * out[r]
            out[j] = acc
        return out

    def expand(self, bits: Sequence[int], q0_of) -> object:
        """``sum_j h_j Q0(n-j) prod_{l>j} (xbar_l - x_l)``."""
        n = len(bits)
        h = self.h(bits)
        total = 0.0
        sign = 1
        for j in range(n, -1, -1):
            if h[j] != 0.0:
                total = total + h[j] * q0_of(n - j) * sign
            if j >= 1:
                sign *= 1 - 2 * bits[j - 1]
        return total

    def right_size_probs(self, n: int, q0_of) -> list:
        """``P[size of node n+1's component = i]`` for ``i = 1..n+1``."""
        if n == 0:
            return [1.0]
        h0 = self.h_hat(0, n)
        h1 = self.h_hat(1, n)
        out = [q0_of(1)]
        for i in range(2, n + 1):
            term = (-1) ** (i - 1) * h0[0] * q0_of(i)
            for j in range(1, i + 1):
                term = term + (-1) ** (i - j) * h0[j] * q0_of(i - j)
            out.append(term)
        last = 0.0
        for j in range(0, n + 1):
            last = last + (-1) ** (n - j) * h1[j] * q0_of(n - j)
        out.append(last)
        return out


@dataclass(frozen=True)
class HCoefficients:
    h: tuple[float, ...]
    h_hat0: tuple[float, ...]
    h_hat1: tuple[float, ...]


def h_coefficients(x, spec: LineSpec) -> HCoefficients:
    bits = _as_bits(x)
    if len(bits) != spec.n:
        raise ModelError(f"configuration has {len(bits)} links, line has {spec.n}")
    line = _Line(spec)
    return HCoefficients(tuple(line.h(bits)), tuple(line.h_hat(0, spec.n)), tuple(line.h_hat(1, spec.n)))


def _check_m(m: int, spec: LineSpec):
    if not 0 <= m <= spec.M:
        raise ModelError(f"m must lie in 0..{spec.M}, got {m}")


def q_all_zero_given_m(n: int, m: int, spec: LineSpec) -> float:
    """P[no active link on a line of ``n`` links | node n+1 in ``m`` layers]."""
    _check_m(m, spec)
    return float(_Line(spec, n).q0_given(n)[m])


def q_all_zero(n: int, spec: LineSpec) -> float:
    """P[no active link on a line of ``n`` links] ``= A_{n+1}^M``."""
    if spec.q == 1.0:
        return 0.0
    return _Line(spec, n).q0(n)


def config_prob_given_m(x, m: int, spec: LineSpec) -> float:
    _check_m(m, spec)
    return float(config_prob_given_all_m(x, spec)[m])


def config_prob_given_all_m(x, spec: LineSpec) -> np.ndarray:
    """Conditional configuration probabilities for ``m = 0..M``."""
    bits = _as_bits(x)
    line = _Line(spec, len(bits))
    return np.clip(line.expand(bits, line.q0_given), 0.0, 1.0)


def config_prob(x, spec: LineSpec) -> float:
    """Probability that the line is in configuration ``x``."""
    bits = _as_bits(x)
    if len(bits) != spec.n:
        raise ModelError(f"configuration has {len(bits)} links, line has {spec.n}")
    if spec.q == 1.0:
        return float(all(bits))
    line = _Line(spec)
    return float(min(1.0, max(0.0, line.expand(bits, line.q0))))


def config_distribution(spec: LineSpec) -> np.ndarray:
    """All ``2^n`` probabilities, bit ``j-1`` of the index holding ``x_j``."""
    if spec.n > 20:
        raise ModelError("full distribution limited to 20 links")
    n = spec.n
    return np.array([config_prob(LinkConfiguration.from_mask(mask, n), spec) for mask in range(1 << n)])


def cluster_pgf_right(n: int, m: int, z: float, spec: LineSpec) -> float:
    """``E[z^C | node n+1 in m layers]`` for the component of the end node."""
    _check_m(m, spec)
    if n == 0:
        return z
    line = _Line(spec, n)
    probs = line.right_size_probs(n, lambda k: line.q0_given(k)[m])
    return float(sum(pr * z ** i for i, pr in enumerate(probs, start=1)))


def _right_pgf_all_m(line: _Line, n: int, z: float) -> np.ndarray:
    if n == 0:
        return np.full(line.M + 1, z, dtype=float)
    probs = line.right_size_probs(n, line.q0_given)
    return sum(pr * z ** i for i, pr in enumerate(probs, start=1))


def cluster_pgf(n: int, i: int, z: float, spec: LineSpec) -> float:
    """``E[z^{C_{n,i}}]`` for the component of node ``i`` (1-based)."""
    if not 1 <= i <= n + 1:
        raise ModelError(f"node must lie in 1..{n + 1}, got {i}")
    if z == 0:
        raise ModelError("z must be non-zero")
    line = _Line(spec, n)
    left = _right_pgf_all_m(line, i - 1, z)
    right = _right_pgf_all_m(line, n - i + 1, z)
    return float(np.dot(line.weights, left * right) / z)


def cluster_size_distribution(n: int, spec: LineSpec) -> np.ndarray:
    """``P[C_{n,1} = s]`` for ``s = 1..n+1`` (index ``s-1``)."""
    if spec.q == 1.0:
        out = np.zeros(n + 1)
        out[-1] = 1.0
        return out
    line = _Line(spec, n)
    return np.asarray(line.right_size_probs(n, line.q0), dtype=float)


def _expected_end_cluster(n: int, spec: LineSpec) -> float:
    if n == 0:
        return 1.0
    probs = cluster_size_distribution(n, spec)
    return float(np.dot(np.arange(1, n + 2), probs))


def expected_cluster_size(n: int, i: int, spec: LineSpec) -> float:
    """Expected size of node ``i``'s component on a line of ``n`` links."""
    if not 1 <= i <= n + 1:
        raise ModelError(f"node must lie in 1..{n + 1}, got {i}")
    return _expected_end_cluster(i - 1, spec) + _expected_end_cluster(n - i + 1, spec) - 1.0


def mix_outside(f: np.ndarray, m: int, q: float, M: int) -> float:
    """``sum_i B(i; M-m, q) f(i)``: a neighbour active only outside the ``m`` given layers."""
    return float(np.dot(binom_pmf_vector(M - m, q), np.asarray(f, dtype=float)[: M - m + 1]))


def mix_shared(f: np.ndarray, m: int, q: float, M: int) -> float:
    """``sum_i B(i; M-m, q) sum_{j>=1} B(j; m, q) f(i+j)``: a neighbour sharing at least one layer."""
    f = np.asarray(f, dtype=float)
    outside = binom_pmf_vector(M - m, q)
    inside = binom_pmf_vector(m, q)
    total = 0.0
    for i in range(M - m + 1):
        for j in range(1, m + 1):
            total += outside[i] * inside[j] * f[i + j]
    return total


def _outside_matrix(q: float, M: int) -> np.ndarray:
    rows = np.zeros((M + 1, M + 1))
    for m in range(M + 1):
        rows[m, : M - m + 1] = binom_pmf_vector(M - m, q)
    return rows


def active_links_pgf_given_m(n: int, z: float, spec: LineSpec) -> np.ndarray:
    """``E[z^{L_n} | node n+1 in m layers]`` for ``m = 0..M``.

    The shared-layer sum collapses because the two binomial counts add up to
    a Binomial(M, q): ``mix_shared(f, m) = mix_outside(f, 0) - qbar^m mix_outside(f, m)``.
    """
    if n < 1:
        raise ModelError("n must be at least 1")
    q, M = spec.q, spec.M
    qbm = (1.0 - q) ** np.arange(M + 1)
    B = _outside_matrix(q, M)
    L = qbm + z * (1.0 - qbm)
    for _ in range(2, n + 1):
        F = B @ L
        L = qbm * F * (1.0 - z) + z * F[0]
    return L


def active_links_pgf(n: int, z: float, spec: LineSpec) -> float:
    """``E[z^{L_n}]`` where ``L_n`` counts active links."""
    return float(np.dot(binom_pmf_vector(spec.M, spec.q), active_links_pgf_given_m(n, z, spec)))


def expected_active_links(n: int, spec: LineSpec) -> float:
    """``n (1 - (1 - q^2)^M)``."""
    return n * (1.0 - (1.0 - spec.q ** 2) ** spec.M)


def poly_p_exact(q: Fraction, N: int) -> tuple[Fraction, ...]:
    """Rational ``P_1..P_N``."""
    return poly_p_table(Fraction(q), N).values
