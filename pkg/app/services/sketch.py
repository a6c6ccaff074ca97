"""
One estimator instance of the colored half-edge sketch.

Every streamed edge u-v is applied as the two directed edges u->v and v->u.
For pattern edge i the directed edge w->x contributes M_i = X_{2i-1}(w) X_{2i}(x)
to the accumulator Z_i at colors (C(w), C(x)):

- Algorithm 1 (ACCUMULATE) keeps Z_i^{c1,c2} as complex diagonals.
- Algorithm 2 (COUNT), signed powers only, keeps an int64 count per exponent
  of M and rebuilds Z after the stream ends. Counts are exact, so deletions
  cancel bit for bit.

The estimate is Re tr(S) scaled by C^t / (C(C-1)...(C-t+1) d auto(H)); the
imaginary part has zero mean and is only kept for diagnostics.
"""

import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from itertools import islice, permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..schemas import SketchDump
from ..schemas.models import DUMP_VERSION
from .algebra import GroupElement, GroupSpec, multiply, multiply_arrays
from .errors import SketchConfigError
from .hashing import Coloring, HalfEdgeHashes, XOverride, build_hashes
from .pattern import Pattern, parse_pattern
from .streamio import EdgeBatch, EdgeEvent, make_batch

logger = logging.getLogger(__name__)

MAX_EVENTS = 1 << 62
TUPLE_CHUNK = 1 << 15


class Algorithm(IntEnum):
    ACCUMULATE = 1
    COUNT = 2


@dataclass(frozen=True)
class SketchConfig:
    pattern: Pattern
    spec: GroupSpec
    colors: int
    algorithm: Algorithm = Algorithm.COUNT
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.colors < self.pattern.t:
            raise SketchConfigError(f"need at least t={self.pattern.t} colors, got {self.colors}")
        if self.algorithm is Algorithm.COUNT and not self.spec.signed:
            raise SketchConfigError(f"algorithm 2 needs a matrix:<d> group, got {self.spec}")


@dataclass(frozen=True)
class SketchEstimate:
    value: float
    imaginary: float


def falling_factorial(n: int, r: int) -> int:
    return math.perm(n, r)


class SketchState:
    """Single-writer state of one instance; see module docstring for the update rule."""

    def __init__(self, config: SketchConfig, *, coloring: Optional[Coloring] = None,
                 x_override: Optional[XOverride] = None):
        self.config = config
        self.hashes: HalfEdgeHashes = build_hashes(config.pattern, config.spec, config.colors, config.seed,
                                                   coloring=coloring, x_override=x_override)
        shape = (config.pattern.k, config.colors, config.colors)
        self.z: Optional[np.ndarray] = None
        self.counts: Optional[np.ndarray] = None
        if config.algorithm is Algorithm.ACCUMULATE:
            self.z = np.zeros(shape + (config.spec.dim,), dtype=np.complex128)
        else:
            self.counts = np.zeros(shape + (config.spec.size,), dtype=np.int64)
        self.events = 0
        self.cells_touched = 0

    @property
    def injected(self) -> bool:
        return self.hashes.coloring is not None or self.hashes.x_override is not None

    def update(self, event: EdgeEvent) -> None:
        self.update_batch(make_batch([event]))

    def ingest(self, events: Iterable[EdgeEvent]) -> None:
        for event in events:
            self.update(event)

    def update_batch(self, batch: EdgeBatch) -> None:
        """Apply a block of events; equivalent to calling update on each in any order."""
        if not len(batch):
            return
        assert self.events + len(batch) < MAX_EVENTS, "counter overflow guard"
        pattern, spec = self.config.pattern, self.config.spec
        colors = self.hashes.color_array(batch.vertices)
        xs = self.hashes.x_table(batch.vertices)
        ui, vi = batch.u_index, batch.v_index
        c1 = np.concatenate([colors[ui], colors[vi]])
        c2 = np.concatenate([colors[vi], colors[ui]])
        direction_signs = np.concatenate([batch.signs, batch.signs])

        for i in range(pattern.k):
            tail_exp, tail_sign = xs[2 * i + 1]
            head_exp, head_sign = xs[2 * i + 2]
            forward = multiply_arrays(tail_exp[ui], tail_sign[ui], head_exp[vi], head_sign[vi], spec)
            backward = multiply_arrays(tail_exp[vi], tail_sign[vi], head_exp[ui], head_sign[ui], spec)
            exps = np.concatenate([forward[0], backward[0]])
            signs = np.concatenate([forward[1], backward[1]]) * direction_signs
            if self.counts is not None:
                np.add.at(self.counts, (i, c1, c2, exps), signs)
            else:
                np.add.at(self.z, (i, c1, c2), signs[:, None] * spec.embedding_table[exps])
            self.cells_touched += len(exps)

        self.events += len(batch)

    def materialize(self) -> np.ndarray:
        """Z accumulators, shape (k, C, C, dim), entry l = sum_j Count(i, j) ω^(jl)."""
        if self.z is not None:
            return self.z.copy()
        return self.counts.astype(np.complex128) @ self.config.spec.embedding_table

    def tuple_trace(self, colors: Sequence[int]) -> complex:
        """trace(S_(c1..ct)) for one tuple of distinct 1-based colors."""
        pattern = self.config.pattern
        if len(colors) != pattern.t or len(set(colors)) != pattern.t:
            raise SketchConfigError(f"need {pattern.t} distinct colors, got {tuple(colors)}")
        if min(colors) < 1 or max(colors) > self.config.colors:
            raise SketchConfigError(f"colors must lie in 1..{self.config.colors}")
        z = self.materialize()
        product = np.ones(self.config.spec.dim, dtype=np.complex128)
        for i, (a, b) in enumerate(pattern.edges):
            product = product * z[i, colors[a - 1] - 1, colors[b - 1] - 1]
        return complex(product.sum())

    def _scale(self) -> float:
        pattern, colors = self.config.pattern, self.config.colors
        return colors ** pattern.t / (falling_factorial(colors, pattern.t) * self.config.spec.dim * pattern.auto_count)

    def finalize_detail(self) -> SketchEstimate:
        """Naive final computation over all ordered tuples of distinct colors."""
        pattern, colors = self.config.pattern, self.config.colors
        if colors < pattern.t:
            raise SketchConfigError(f"no tuple of {pattern.t} distinct colors among {colors}")
        z = self.materialize()
        tails = np.array([a - 1 for a, _ in pattern.edges])
        heads = np.array([b - 1 for _, b in pattern.edges])
        # one fsum per chunk, then over the chunk totals
        real_parts: List[float] = []
        imag_parts: List[float] = []
        tuples = permutations(range(colors), pattern.t)
        while True:
            block = np.array(list(islice(tuples, TUPLE_CHUNK)), dtype=np.int64)
            if not block.size:
                break
            product = np.ones((len(block), self.config.spec.dim), dtype=np.complex128)
            for i in range(pattern.k):
                product *= z[i, block[:, tails[i]], block[:, heads[i]]]
            traces = product.sum(axis=1)
            real_parts.append(math.fsum(traces.real.tolist()))
            imag_parts.append(math.fsum(traces.imag.tolist()))
        scale = self._scale()
        return SketchEstimate(math.fsum(real_parts) * scale, math.fsum(imag_parts) * scale)

    def finalize(self) -> float:
        return self.finalize_detail().value

    def finalize_cycle4_fast_detail(self) -> SketchEstimate:
        """
        4-cycle final computation with O(C^3 d) work.

        For colors c1 != c3 of vertices 1 and 3: A sums Z1 Z2 over c2 outside
        {c1, c3}, B sums Z3 Z4 over c4 outside {c1, c3}, and D removes the
        c2 = c4 terms from A B.
        """
        if not self.config.pattern.is_cycle4:
            raise SketchConfigError("fast finalizer needs the 4-cycle with edges (1,2),(2,3),(3,4),(4,1)")
        z = self.materialize()
        z1, z2, z3, z4 = z[0], z[1], z[2], z[3]
        d1, d2, d3, d4 = (np.diagonal(x, axis1=0, axis2=1).T for x in (z1, z2, z3, z4))
        z3t = z3.transpose(1, 0, 2)
        z4t = z4.transpose(1, 0, 2)

        a = np.einsum('acl,cbl->abl', z1, z2) - d1[:, None] * z2 - z1 * d2[None]
        b = np.einsum('bcl,cal->abl', z3, z4) - z3t * d4[:, None] - d3[None] * z4t
        d = (np.einsum('acl,cbl,bcl,cal->abl', z1, z2, z3, z4)
             - d1[:, None] * z2 * z3t * d4[:, None]
             - z1 * d2[None] * d3[None] * z4t)

        colors = self.config.colors
        off_diagonal = ~np.eye(colors, dtype=bool)
        traces = (a * b - d).sum(axis=2)[off_diagonal]
        scale = self._scale()
        return SketchEstimate(math.fsum(traces.real.tolist()) * scale, math.fsum(traces.imag.tolist()) * scale)

    def finalize_cycle4_fast(self) -> float:
        return self.finalize_cycle4_fast_detail().value

    def same_counters(self, other: "SketchState") -> bool:
        if self.counts is not None:
            return other.counts is not None and np.array_equal(self.counts, other.counts)
        return other.z is not None and np.array_equal(self.z, other.z)

    def _empty_like(self) -> "SketchState":
        clone = SketchState.__new__(SketchState)
        clone.config = self.config
        clone.hashes = self.hashes
        clone.z = None if self.z is None else np.zeros_like(self.z)
        clone.counts = None if self.counts is None else np.zeros_like(self.counts)
        clone.events = 0
        clone.cells_touched = 0
        return clone

    def negated(self) -> "SketchState":
        clone = self._empty_like()
        if self.counts is not None:
            clone.counts = -self.counts
        else:
            clone.z = -self.z
        return clone

    def to_dump(self) -> SketchDump:
        config = self.config
        if self.injected:
            raise SketchConfigError("states with injected coloring or X values cannot be dumped")
        dump = SketchDump(
            pattern=config.pattern.serialize(),
            pattern_name=config.pattern.name,
            allow_leaves=config.pattern.allow_leaves,
            group=str(config.spec),
            colors=config.colors,
            algorithm=int(config.algorithm),
            seed=config.seed,
            events=self.events,
            cells_touched=self.cells_touched,
            shape=list(self.counts.shape if self.counts is not None else self.z.shape),
        )
        if self.counts is not None:
            dump.counts = self.counts.ravel().tolist()
        else:
            dump.real = self.z.real.ravel().tolist()
            dump.imag = self.z.imag.ravel().tolist()
        return dump

    @classmethod
    def from_dump(cls, dump: SketchDump) -> "SketchState":
        if dump.version != DUMP_VERSION:
            raise SketchConfigError(f"unsupported sketch dump version {dump.version}")
        pattern = parse_pattern(dump.pattern, allow_leaves=dump.allow_leaves, name=dump.pattern_name)
        config = SketchConfig(pattern, GroupSpec.parse(dump.group), dump.colors, Algorithm(dump.algorithm), dump.seed)
        state = cls(config)
        shape = tuple(dump.shape)
        if state.counts is not None:
            if dump.counts is None or state.counts.shape != shape or len(dump.counts) != state.counts.size:
                raise SketchConfigError("sketch dump counters do not match its configuration")
            state.counts = np.array(dump.counts, dtype=np.int64).reshape(shape)
        else:
            if (dump.real is None or dump.imag is None or state.z.shape != shape
                    or len(dump.real) != state.z.size or len(dump.imag) != state.z.size):
                raise SketchConfigError("sketch dump accumulators do not match its configuration")
            state.z = (np.array(dump.real) + 1j * np.array(dump.imag)).reshape(shape)
        state.events = dump.events
        state.cells_touched = dump.cells_touched
        return state


def merge(a: SketchState, b: SketchState) -> SketchState:
    """
    Cellwise sum of two states built from the same configuration.

    Raises:
        SketchConfigError: configurations differ.
    """
    if a.config != b.config:
        raise SketchConfigError("cannot merge sketches with different configurations")
    if a.injected or b.injected:
        raise SketchConfigError("cannot merge sketches with injected coloring or X values")
    merged = a._empty_like()
    if a.counts is not None:
        merged.counts = a.counts + b.counts
    else:
        merged.z = a.z + b.z
    merged.events = a.events + b.events
    merged.cells_touched = a.cells_touched + b.cells_touched
    return merged


def m_value(hashes: HalfEdgeHashes, i: int, w: int, x: int) -> GroupElement:
    """M_i(w -> x) = X_{2i-1}(w) X_{2i}(x) for 1-based pattern edge i."""
    return multiply(hashes.eval_x(2 * i - 1, w), hashes.eval_x(2 * i, x), hashes.spec)


def q_value(hashes: HalfEdgeHashes, edges: Sequence[Tuple[int, int]]) -> GroupElement:
    """Q(T): product of M_i over a k-tuple of directed host edges."""
    result = hashes.spec.identity()
    for i, (w, x) in enumerate(edges, start=1):
        result = multiply(result, m_value(hashes, i, w, x), hashes.spec)
    return result


def induced_vertex_map(pattern: Pattern, edges: Sequence[Tuple[int, int]]) -> Optional[Dict[int, int]]:
    """The vertex map b -> v induced by a k-tuple of directed edges, or None if it is not well defined."""
    image: Dict[int, int] = {}
    for i, (w, x) in enumerate(edges, start=1):
        for j, v in ((2 * i - 1, w), (2 * i, x)):
            b = pattern.half_edge_vertex(j)
            if image.setdefault(b, v) != v:
                return None
    return image
