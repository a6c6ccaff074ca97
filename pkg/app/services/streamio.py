"""
Edge-stream text format, batching, statistics and random stream generation.

One event per line: an optional `+` (insert, the default) or `-` (delete)
followed by two decimal vertex ids in [0, 2^64), whitespace separated. Lines
starting with `#` and blank lines are ignored.

Duplicate insertions and deletions of absent edges are not detected here
(turnstile semantics); `oracle.replay` is the strict consumer.
"""

import logging
import sys
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import islice
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .errors import GenerationError, StreamFormatError
from .pattern import Pattern

logger = logging.getLogger(__name__)

MAX_VERTEX_ID = (1 << 64) - 1
REJECTION_ATTEMPTS = 64
GENERATION_RESTARTS = 64


class EdgeOp(str, Enum):
    INSERT = "+"
    DELETE = "-"


@dataclass(frozen=True)
class EdgeEvent:
    op: EdgeOp
    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise StreamFormatError(f"self-loop on vertex {self.u}")
        for vertex in (self.u, self.v):
            if not 0 <= vertex <= MAX_VERTEX_ID:
                raise StreamFormatError(f"vertex id {vertex} outside 0..2^64-1")

    @classmethod
    def insert(cls, u: int, v: int) -> "EdgeEvent":
        return cls(EdgeOp.INSERT, u, v)

    @classmethod
    def delete(cls, u: int, v: int) -> "EdgeEvent":
        return cls(EdgeOp.DELETE, u, v)

    @property
    def sign(self) -> int:
        return 1 if self.op is EdgeOp.INSERT else -1

    def __str__(self) -> str:
        return f"{self.op.value} {self.u} {self.v}"


def parse_line(line: str, line_number: Optional[int] = None) -> Optional[EdgeEvent]:
    text = line.strip()
    if not text or text.startswith("#"):
        return None
    parts = text.split()
    op = EdgeOp.INSERT
    if parts[0] in ("+", "-"):
        op = EdgeOp(parts[0])
        parts = parts[1:]
    if len(parts) != 2 or not all(part.isdigit() for part in parts):
        raise StreamFormatError(f"malformed event {text!r}", line_number)
    u, v = int(parts[0]), int(parts[1])
    try:
        return EdgeEvent(op, u, v)
    except StreamFormatError as e:
        raise StreamFormatError(str(e), line_number)


def parse_stream(source: Union[str, Iterable[str]]) -> Iterator[EdgeEvent]:
    """Lazily parse events from text or from any iterable of lines (e.g. an open file)."""
    lines = source.splitlines() if isinstance(source, str) else source
    for line_number, line in enumerate(lines, start=1):
        event = parse_line(line, line_number)
        if event is not None:
            yield event


def read_stream(path: Union[str, Path]) -> Iterator[EdgeEvent]:
    """Stream events from a file, or from stdin when path is `-`."""
    if str(path) == "-":
        yield from parse_stream(sys.stdin)
        return
    with open(path, "r") as f:
        yield from parse_stream(f)


def serialize_stream(events: Iterable[EdgeEvent]) -> str:
    return "".join(f"{event}\n" for event in events)


@dataclass
class EdgeBatch:
    """A block of events as arrays, with endpoints indexed into the unique vertex list."""

    signs: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    vertices: np.ndarray
    u_index: np.ndarray
    v_index: np.ndarray

    def __len__(self) -> int:
        return len(self.signs)


def make_batch(events: Sequence[EdgeEvent]) -> EdgeBatch:
    count = len(events)
    signs = np.fromiter((e.sign for e in events), dtype=np.int64, count=count)
    us = np.fromiter((e.u for e in events), dtype=np.uint64, count=count)
    vs = np.fromiter((e.v for e in events), dtype=np.uint64, count=count)
    vertices, inverse = np.unique(np.concatenate([us, vs]), return_inverse=True)
    inverse = inverse.reshape(-1)
    return EdgeBatch(signs, us, vs, vertices, inverse[:count], inverse[count:])


def iter_batches(events: Iterable[EdgeEvent], batch_size: int) -> Iterator[EdgeBatch]:
    iterator = iter(events)
    while True:
        block = list(islice(iterator, batch_size))
        if not block:
            return
        yield make_batch(block)


@dataclass
class StreamStats:
    inserts: int = 0
    deletes: int = 0
    degrees: Dict[int, int] = field(default_factory=dict, repr=False)

    def add(self, event: EdgeEvent) -> None:
        step = event.sign
        if step > 0:
            self.inserts += 1
        else:
            self.deletes += 1
        for vertex in (event.u, event.v):
            self.degrees[vertex] = self.degrees.get(vertex, 0) + step

    @property
    def events(self) -> int:
        return self.inserts + self.deletes

    @property
    def net_edges(self) -> int:
        return self.inserts - self.deletes

    @property
    def directed_edges(self) -> int:
        """m as used by the planner: every undirected edge counts twice."""
        return 2 * self.net_edges

    @property
    def vertices(self) -> int:
        return sum(1 for degree in self.degrees.values() if degree > 0)

    @property
    def max_degree(self) -> int:
        return max(self.degrees.values(), default=0)

    def summary(self) -> Dict[str, int]:
        return {
            "events": self.events,
            "inserts": self.inserts,
            "deletes": self.deletes,
            "net_edges": self.net_edges,
            "directed_edges": self.directed_edges,
            "vertices": self.vertices,
            "max_degree": self.max_degree,
        }


def stream_stats(events: Iterable[EdgeEvent]) -> StreamStats:
    stats = StreamStats()
    for event in events:
        stats.add(event)
    return stats


def _random_edge(rng: np.random.Generator, n: int, degree: Counter, edges: Set[frozenset],
                 max_degree: int, attempts: int = REJECTION_ATTEMPTS) -> Optional[Tuple[int, int]]:
    """
    Uniform admissible edge: no self-loop, not present, both endpoints below the cap.

    Rejection sampling first; when that keeps failing the admissible pairs are
    enumerated among the unsaturated vertices and one is drawn uniformly.
    Returns None when no admissible pair is left.
    """
    for _ in range(attempts):
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u == v or frozenset((u, v)) in edges:
            continue
        if degree[u] >= max_degree or degree[v] >= max_degree:
            continue
        return u, v
    open_vertices = [v for v in range(n) if degree[v] < max_degree]
    candidates = [(u, v) for i, u in enumerate(open_vertices) for v in open_vertices[i + 1:]
                  if frozenset((u, v)) not in edges]
    if not candidates:
        return None
    return candidates[int(rng.integers(0, len(candidates)))]


def _draw_edges(rng: np.random.Generator, n: int, count: int, max_degree: int, degree: Counter,
                edges: Set[frozenset]) -> Optional[List[Tuple[int, int]]]:
    drawn: List[Tuple[int, int]] = []
    for _ in range(count):
        pair = _random_edge(rng, n, degree, edges, max_degree)
        if pair is None:
            return None
        u, v = pair
        edges.add(frozenset(pair))
        degree[u] += 1
        degree[v] += 1
        drawn.append(pair)
    return drawn


def generate_events(n: int, m_target: int, max_degree: int, *,
                    planted: Sequence[Tuple[Pattern, int]] = (),
                    churn: int = 0, seed: int = 0) -> List[EdgeEvent]:
    """
    Random simple graph on vertices 0..n-1 as an insertion stream.

    Planted copies go on disjoint vertex tuples first; m_target further edges
    are drawn uniformly, rejecting duplicates and any edge that would push an
    endpoint past max_degree. A draw that runs into a dead end starts over
    from a seed derived from `seed` and the restart index. The insertions are
    shuffled. `churn` insert/delete
    pairs of absent edges are then spliced in from a separate random source, so
    the net graph is the same with or without churn.

    Raises:
        GenerationError: parameters that cannot be met.
    """
    if n < 2 or m_target < 0 or max_degree < 1 or churn < 0:
        raise GenerationError(f"invalid parameters n={n}, m_target={m_target}, "
                              f"max_degree={max_degree}, churn={churn}")
    if m_target > n * max_degree // 2 or m_target > n * (n - 1) // 2:
        raise GenerationError(f"{m_target} edges do not fit on {n} vertices with degree cap {max_degree}")
    planted_vertices = sum(p.t * count for p, count in planted)
    if planted_vertices > n:
        raise GenerationError(f"planted copies need {planted_vertices} vertices, only {n} available")
    for p, count in planted:
        if count < 0:
            raise GenerationError(f"negative planted count for {p.label}")
        if count and max(p.degree(b) for b in range(1, p.t + 1)) > max_degree:
            raise GenerationError(f"{p.label} has a vertex of degree above the cap {max_degree}")

    seed = seed & MAX_VERTEX_ID
    rng = np.random.default_rng([seed, 0])
    degree: Counter = Counter()
    edges: Set[frozenset] = set()
    inserts: List[Tuple[int, int]] = []

    order = [int(x) for x in rng.permutation(n)]
    offset = 0
    for p, count in planted:
        for _ in range(count):
            image = order[offset:offset + p.t]
            offset += p.t
            for a, b in p.edges:
                u, v = image[a - 1], image[b - 1]
                edges.add(frozenset((u, v)))
                degree[u] += 1
                degree[v] += 1
                inserts.append((u, v))

    drawn = None
    for restart in range(GENERATION_RESTARTS):
        draw_rng = rng if restart == 0 else np.random.default_rng([seed, 2, restart])
        drawn = _draw_edges(draw_rng, n, m_target, max_degree, Counter(degree), set(edges))
        if drawn is not None:
            break
        logger.debug(f"Edge draw hit a dead end under degree cap {max_degree}; restart {restart + 1}")
    if drawn is None:
        raise GenerationError(f"could not place {m_target} edges under degree cap {max_degree} "
                              f"after {GENERATION_RESTARTS} restarts")
    inserts.extend(drawn)

    shuffled = [inserts[i] for i in rng.permutation(len(inserts))]
    events = [EdgeEvent.insert(u, v) for u, v in shuffled]
    if churn == 0:
        return events

    churn_rng = np.random.default_rng([seed, 1])
    positions = Counter(int(x) for x in churn_rng.integers(0, len(events) + 1, size=churn))
    current: Set[frozenset] = set()
    running: Counter = Counter()
    result: List[EdgeEvent] = []
    for index in range(len(events) + 1):
        for _ in range(positions.get(index, 0)):
            pair = _random_edge(churn_rng, n, running, current, max_degree)
            if pair is None:
                raise GenerationError(f"no absent edge fits under degree cap {max_degree} for churn")
            u, v = pair
            result.append(EdgeEvent.insert(u, v))
            result.append(EdgeEvent.delete(u, v))
        if index < len(events):
            event = events[index]
            current.add(frozenset((event.u, event.v)))
            running[event.u] += 1
            running[event.v] += 1
            result.append(event)
    logger.info(f"Generated {len(result)} events ({len(inserts)} edges, {churn} churn pairs)")
    return result


def generate(n: int, m_target: int, max_degree: int, *,
             planted: Sequence[Tuple[Pattern, int]] = (),
             churn: int = 0, seed: int = 0) -> str:
    return serialize_stream(generate_events(n, m_target, max_degree, planted=planted, churn=churn, seed=seed))
