import logging
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Dict, Optional, Tuple

import networkx as nx

from .errors import PatternError

logger = logging.getLogger(__name__)

MAX_PATTERN_VERTICES = 10

BUILTIN_PATTERNS: Dict[str, str] = {
    "triangle": "3 3\n1 2\n2 3\n3 1\n",
    "cycle4": "4 4\n1 2\n2 3\n3 4\n4 1\n",
    "cycle5": "5 5\n1 2\n2 3\n3 4\n4 5\n5 1\n",
    "k4": "4 6\n1 2\n2 3\n3 4\n4 1\n1 3\n2 4\n",
    # 4-cycle plus the 1-3 chord, edge order fixed so Γ(1) = {1, 8, 10}
    "diamond": "4 5\n1 2\n2 3\n3 4\n4 1\n3 1\n",
}

CYCLE4_EDGES = ((1, 2), (2, 3), (3, 4), (4, 1))


@dataclass(frozen=True)
class Pattern:
    """
    Directed pattern graph H with its half-edge index.

    Edge i (1-based) owns half-edges 2i-1 (tail) and 2i (head); half-edge j is
    incident to vertex a_j. Directions only fix the half-edge numbering, copies
    are counted on the undirected graph.
    """

    t: int
    k: int
    edges: Tuple[Tuple[int, int], ...]
    gamma: Dict[int, Tuple[int, ...]]
    distinguished: Dict[int, int]
    auto_count: int
    allow_leaves: bool = False
    name: Optional[str] = field(default=None, compare=False)

    def half_edge_vertex(self, j: int) -> int:
        """Return a_j, the pattern vertex incident to half-edge j."""
        tail, head = self.edges[(j - 1) // 2]
        return tail if j % 2 == 1 else head

    def degree(self, b: int) -> int:
        return len(self.gamma[b])

    def is_distinguished(self, j: int) -> bool:
        return self.distinguished[self.half_edge_vertex(j)] == j

    @property
    def non_distinguished(self) -> Tuple[int, ...]:
        return tuple(j for j in range(1, 2 * self.k + 1) if not self.is_distinguished(j))

    @property
    def is_cycle4(self) -> bool:
        return self.t == 4 and self.edges == CYCLE4_EDGES

    @property
    def label(self) -> str:
        return self.name or f"pattern(t={self.t}, k={self.k})"

    def undirected_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self.t + 1))
        graph.add_edges_from(self.edges)
        return graph

    def serialize(self) -> str:
        lines = [f"{self.t} {self.k}"]
        lines.extend(f"{a} {b}" for a, b in self.edges)
        return "\n".join(lines) + "\n"


def _parse_ints(line: str, line_number: int, expected: int) -> Tuple[int, ...]:
    parts = line.split()
    if len(parts) != expected:
        raise PatternError(f"line {line_number}: expected {expected} integers, got {line!r}")
    try:
        return tuple(int(part) for part in parts)
    except ValueError:
        raise PatternError(f"line {line_number}: not an integer in {line!r}")


def parse_pattern(text: str, *, allow_leaves: bool = False, name: Optional[str] = None) -> Pattern:
    """
    Parse and validate a pattern file.

    Format: first line `t k`, then k lines `a b` (directed edge a -> b, 1-based);
    lines starting with `#` and blank lines are ignored.

    Raises:
        PatternError: malformed text, self-loop, duplicate edge, disconnected
            pattern, leaf vertex without allow_leaves, or t > 10.
    """
    rows = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((line_number, line))
    if not rows:
        raise PatternError("empty pattern file")

    header_line, header = rows[0]
    t, k = _parse_ints(header, header_line, 2)
    if t < 1 or k < 1:
        raise PatternError(f"line {header_line}: t and k must be positive, got t={t}, k={k}")
    if t > MAX_PATTERN_VERTICES:
        raise PatternError(f"patterns are limited to {MAX_PATTERN_VERTICES} vertices, got t={t}")
    if len(rows) - 1 != k:
        raise PatternError(f"header declares {k} edges but {len(rows) - 1} edge lines follow")

    edges = []
    seen = set()
    for line_number, line in rows[1:]:
        a, b = _parse_ints(line, line_number, 2)
        if not (1 <= a <= t and 1 <= b <= t):
            raise PatternError(f"line {line_number}: endpoint outside 1..{t} in {line!r}")
        if a == b:
            raise PatternError(f"line {line_number}: self-loop at vertex {a}")
        key = frozenset((a, b))
        if key in seen:
            raise PatternError(f"line {line_number}: duplicate edge {a}-{b}")
        seen.add(key)
        edges.append((a, b))

    gamma: Dict[int, list] = {b: [] for b in range(1, t + 1)}
    for i, (tail, head) in enumerate(edges, start=1):
        gamma[tail].append(2 * i - 1)
        gamma[head].append(2 * i)

    graph = nx.Graph()
    graph.add_nodes_from(range(1, t + 1))
    graph.add_edges_from(edges)
    if not nx.is_connected(graph):
        raise PatternError("pattern graph is not connected")

    leaves = [b for b in range(1, t + 1) if len(gamma[b]) < 2]
    if leaves:
        if not allow_leaves:
            raise PatternError(f"pattern has leaf vertices {leaves}; pass allow_leaves to accept them")
        logger.warning(f"Pattern has leaf vertices {leaves}: estimates stay unbiased "
                       f"but the variance guarantees no longer apply")

    frozen_gamma = {b: tuple(sorted(indices)) for b, indices in gamma.items()}
    distinguished = {b: indices[0] for b, indices in frozen_gamma.items()}
    edge_tuple = tuple(edges)

    return Pattern(
        t=t,
        k=k,
        edges=edge_tuple,
        gamma=frozen_gamma,
        distinguished=distinguished,
        auto_count=_count_automorphisms(t, edge_tuple),
        allow_leaves=allow_leaves,
        name=name,
    )


def _count_automorphisms(t: int, edges: Tuple[Tuple[int, int], ...]) -> int:
    edge_set = {frozenset(edge) for edge in edges}
    count = 0
    for perm in permutations(range(1, t + 1)):
        if all(frozenset((perm[a - 1], perm[b - 1])) in edge_set for a, b in edges):
            count += 1
    return count


def automorphism_count(p: Pattern) -> int:
    """Number of vertex permutations preserving the undirected edge set of H."""
    return _count_automorphisms(p.t, p.edges)


def builtin_pattern(name: str, *, allow_leaves: bool = False) -> Pattern:
    if name not in BUILTIN_PATTERNS:
        raise PatternError(f"unknown pattern {name!r}; built-ins are {sorted(BUILTIN_PATTERNS)}")
    return parse_pattern(BUILTIN_PATTERNS[name], allow_leaves=allow_leaves, name=name)


def load_pattern(name_or_path: str, *, allow_leaves: bool = False) -> Pattern:
    """Resolve a built-in pattern name or read a pattern file."""
    if name_or_path in BUILTIN_PATTERNS:
        return builtin_pattern(name_or_path, allow_leaves=allow_leaves)
    path = Path(name_or_path)
    if not path.is_file():
        raise PatternError(f"{name_or_path!r} is neither a built-in pattern nor a readable file")
    return parse_pattern(path.read_text(), allow_leaves=allow_leaves, name=path.stem)
