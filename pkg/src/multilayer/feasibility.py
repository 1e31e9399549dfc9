"""Feasibility of configurations on multilayer cliques via clique edge covers.

When the base graph is complete, each layer's links form a clique on its
active nodes, so a configuration is reachable in ``M`` layers exactly when
its active links can be covered by at most ``M`` cliques.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import BaseGraph, LinkConfiguration, ModelError, SizeCapError

MAX_COVER_LINKS = 20


@dataclass(frozen=True)
class CliqueCover:
    cliques: tuple[frozenset[int], ...]
    covered_links: int  # bitmask over the graph's links

    def __len__(self):
        return len(self.cliques)


def induced_subgraph(g: BaseGraph, x: LinkConfiguration) -> BaseGraph:
    """Same node set, only the links active in ``x``."""
    if len(x) != g.n_links:
        raise ModelError(f"configuration has {len(x)} bits, graph has {g.n_links} links")
    return BaseGraph(g.n, tuple(link for link, b in zip(g.links, x.bits) if b))


def _neighbour_masks(g: BaseGraph) -> list[int]:
    nbr = [0] * g.n
    for u, v in g.links:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    return nbr


def maximal_cliques(g: BaseGraph) -> list[int]:
    """Maximal cliques with at least one link, as node bitmasks (Bron-Kerbosch with pivoting)."""
    nbr = _neighbour_masks(g)
    out: list[int] = []

    def expand(r: int, p: int, x: int):
        if p == 0 and x == 0:
            if r & (r - 1):
                out.append(r)
            return
        pu = p | x
        pivot = max(_bits(pu), key=lambda u: bin(p & nbr[u]).count("1"))
        cand = p & ~nbr[pivot]
        while cand:
            v = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            expand(r | 1 << v, p & nbr[v], x & nbr[v])
            p &= ~(1 << v)
            x |= 1 << v

    expand(0, (1 << g.n) - 1, 0)
    return out


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _clique_links(g: BaseGraph, nodes: int) -> int:
    mask = 0
    for idx, (u, v) in enumerate(g.links):
        if (nodes >> u) & 1 and (nodes >> v) & 1:
            mask |= 1 << idx
    return mask


def min_clique_edge_cover(g: BaseGraph) -> CliqueCover:
    """Smallest set of cliques whose links cover every link of ``g``.

    Only maximal cliques need be considered.  Search deepens the cover size
    and branches on the cliques containing the lowest uncovered link; a
    bound based on the largest clique prunes hopeless branches.
    """
    if g.n_links > MAX_COVER_LINKS:
        raise SizeCapError(f"exact clique cover limited to {MAX_COVER_LINKS} links")
    full = (1 << g.n_links) - 1
    if full == 0:
        return CliqueCover((), 0)
    cliques = [(c, _clique_links(g, c)) for c in maximal_cliques(g)]
    by_link: list[list[tuple[int, int]]] = [[] for _ in range(g.n_links)]
    for c, lm in cliques:
        for idx in _bits(lm):
            by_link[idx].append((c, lm))
    for lst in by_link:
        lst.sort(key=lambda item: -bin(item[1]).count("1"))
    biggest = max(bin(lm).count("1") for _, lm in cliques)

    def search(covered: int, budget: int, chosen: list[int]) -> list[int] | None:
        if covered == full:
            return list(chosen)
        missing = bin(full & ~covered).count("1")
        if budget == 0 or missing > budget * biggest:
            return None
        link = ((full & ~covered) & -(full & ~covered)).bit_length() - 1
        for c, lm in by_link[link]:
            chosen.append(c)
            found = search(covered | lm, budget - 1, chosen)
            chosen.pop()
            if found is not None:
                return found
        return None

    for k in range(1, g.n_links + 1):
        found = search(0, k, [])
        if found is not None:
            return CliqueCover(tuple(frozenset(_bits(c)) for c in found), full)
    raise AssertionError("links always cover themselves")


def mcc_feasible(x: LinkConfiguration, M: int, g: BaseGraph) -> bool:
    """Whether configuration ``x`` of an ``M``-layer clique has positive probability."""
    return feasibility_witness(x, M, g) is not None


def feasibility_witness(x: LinkConfiguration, M: int, g: BaseGraph) -> CliqueCover | None:
    """A cover of the active links by at most ``M`` cliques, or ``None`` if there is none."""
    if not g.is_complete():
        raise ModelError("feasibility test requires a complete base graph")
    if M < 1:
        raise ModelError("M must be positive")
    active = induced_subgraph(g, x)
    if M >= active.n_links:
        # one single-link clique per active link
        cliques = tuple(frozenset(link) for link in active.links)
        return CliqueCover(cliques, x.mask)
    cover = min_clique_edge_cover(active)
    if len(cover) > M:
        return None
    return CliqueCover(cover.cliques, x.mask)
