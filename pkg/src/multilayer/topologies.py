"""Named base graphs."""

from __future__ import annotations

from .model import BaseGraph, ModelError

STAR_FIG7_ARMS = (2, 3, 4, 3)


def star(arms=STAR_FIG7_ARMS) -> BaseGraph:
    """Centre node 0 with a hanging path of ``a`` nodes per arm."""
    edges = []
    nid = 1
    for length in arms:
        prev = 0
        for _ in range(length):
            edges.append((prev, nid))
            prev = nid
            nid += 1
    return BaseGraph(nid, tuple(edges))


def complete_binary_tree(height: int) -> BaseGraph:
    """``height + 1`` levels of nodes, heap-numbered from the root 0."""
    n = 2 ** (height + 1) - 1
    return BaseGraph(n, tuple(((i - 1) // 2, i) for i in range(1, n)))


def by_name(name: str) -> BaseGraph:
    """``star-fig7``, ``btree5``, ``btree<h>``, ``line:<n>``, ``complete:<n>`` or ``star:<a,b,...>``."""
    if name == "star-fig7":
        return star()
    if name.startswith("btree") and name[5:].isdigit():
        return complete_binary_tree(int(name[5:]))
    kind, _, arg = name.partition(":")
    try:
        if kind == "line":
            return BaseGraph.path(int(arg))
        if kind == "complete":
            return BaseGraph.complete(int(arg))
        if kind == "star":
            return star(tuple(int(a) for a in arg.split(",")))
    except ValueError:
        pass
    raise ModelError(f"unknown topology {name!r}")
