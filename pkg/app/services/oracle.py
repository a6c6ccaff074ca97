"""
Exact desk-scale counts used to validate the sketch.

Copies are counted on the undirected pattern: injective homomorphisms into G
divided by auto(H). Because the host digraph carries both directions of
every edge, directed homomorphisms of H into it are the undirected ones.
"""

import logging
from collections.abc import Callable, Mapping
from typing import Dict, Iterable, List, Optional, Sequence

import networkx as nx

from ..config import get_settings
from .errors import MotifSketchError, OracleLimitError, StreamConsistencyError
from .hashing import Coloring
from .pattern import Pattern
from .streamio import EdgeEvent, EdgeOp

logger = logging.getLogger(__name__)


class MaterializedGraph:
    """Simple undirected host graph built by replaying a stream."""

    def __init__(self):
        self.graph = nx.Graph()

    def insert(self, u: int, v: int) -> None:
        if u == v:
            raise StreamConsistencyError(f"self-loop on vertex {u}")
        if self.graph.has_edge(u, v):
            raise StreamConsistencyError(f"edge {u}-{v} inserted twice")
        self.graph.add_edge(u, v)

    def delete(self, u: int, v: int) -> None:
        if not self.graph.has_edge(u, v):
            raise StreamConsistencyError(f"edge {u}-{v} deleted while absent")
        self.graph.remove_edge(u, v)
        for vertex in (u, v):
            if self.graph.degree(vertex) == 0:
                self.graph.remove_node(vertex)

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    @property
    def vertex_count(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def max_degree(self) -> int:
        return max((degree for _, degree in self.graph.degree()), default=0)

    def edge_set(self) -> set:
        return {frozenset(edge) for edge in self.graph.edges()}


def replay(events: Iterable[EdgeEvent]) -> MaterializedGraph:
    """
    Apply a stream strictly.

    Raises:
        StreamConsistencyError: double insertion or deletion of an absent edge.
    """
    g = MaterializedGraph()
    for number, event in enumerate(events, start=1):
        try:
            if event.op is EdgeOp.INSERT:
                g.insert(event.u, event.v)
            else:
                g.delete(event.u, event.v)
        except StreamConsistencyError as e:
            raise StreamConsistencyError(f"event {number}: {e}")
    return g


def _search_order(p: Pattern) -> List[int]:
    # highest degree first, then always a vertex with the most placed neighbours
    h = p.undirected_graph()
    order = [max(h.nodes, key=lambda b: (h.degree(b), -b))]
    while len(order) < p.t:
        placed = set(order)
        remaining = [b for b in h.nodes if b not in placed]
        order.append(max(remaining, key=lambda b: (sum(1 for n in h[b] if n in placed), h.degree(b), -b)))
    return order


def count_injective_homomorphisms(g: MaterializedGraph, p: Pattern,
                                  allowed: Optional[Callable[[int, int], bool]] = None) -> int:
    """
    Backtracking count of injective vertex maps H -> G preserving adjacency.

    `allowed(b, v)` optionally restricts which host vertices may host pattern
    vertex b.
    """
    max_vertices = get_settings().oracle_max_vertices
    if g.vertex_count > max_vertices:
        raise OracleLimitError(f"oracle is limited to {max_vertices} vertices, graph has {g.vertex_count}")
    host = g.graph
    h = p.undirected_graph()
    order = _search_order(p)
    earlier = {b: [n for n in h[b] if order.index(n) < order.index(b)] for b in order}
    image: Dict[int, int] = {}
    used = set()

    def candidates(b: int):
        anchors = earlier[b]
        pool = host[image[anchors[0]]] if anchors else host.nodes
        for v in pool:
            if v in used or host.degree(v) < h.degree(b):
                continue
            if any(not host.has_edge(v, image[n]) for n in anchors[1:]):
                continue
            if allowed is not None and not allowed(b, v):
                continue
            yield v

    def extend(depth: int) -> int:
        if depth == len(order):
            return 1
        b = order[depth]
        total = 0
        for v in candidates(b):
            image[b] = v
            used.add(v)
            total += extend(depth + 1)
            used.discard(v)
            del image[b]
        return total

    return extend(0)


def exact_count(g: MaterializedGraph, p: Pattern) -> int:
    """Number of copies of H in G."""
    homs = count_injective_homomorphisms(g, p)
    count, remainder = divmod(homs, p.auto_count)
    assert remainder == 0, "injective homomorphisms must come in automorphism orbits"
    logger.debug(f"Oracle: {homs} injective homomorphisms of {p.label}, {count} copies")
    return count


def exact_compatible_count(g: MaterializedGraph, p: Pattern, coloring: Coloring, colors: Sequence[int]) -> int:
    """
    Injective homomorphisms φ of H into G with coloring(φ(b)) = colors[b-1] for every b.

    Raises:
        MotifSketchError: the tuple has repeated colors or the wrong length.
    """
    if len(colors) != p.t or len(set(colors)) != p.t:
        raise MotifSketchError(f"need {p.t} distinct colors, got {tuple(colors)}")
    lookup = coloring.__getitem__ if isinstance(coloring, Mapping) else coloring
    return count_injective_homomorphisms(g, p, allowed=lambda b, v: lookup(v) == colors[b - 1])
