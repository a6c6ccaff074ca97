"""
Seeded 4k-wise independent hash families and the per-half-edge functions X_j.

Each hasher is a random polynomial of degree 4k-1 over GF(p), p = 2^61 - 1,
evaluated at the vertex id and reduced modulo its range (|G| for element
hashers, C for the color hasher). The modulo reduction has bias below
range/p < 2^-50 and is left uncorrected.

Vertex ids are 64-bit; they pass through the splitmix64 finalizer, a bijection
on 64-bit words, before reduction mod p, so ids that differ by a multiple of p
do not share hash values.

Coefficient j of hasher i is derive_seed(master_seed, i, j) mod p, where
derive_seed chains the splitmix64 finalizer over its arguments. Hasher 0 is
the color hasher; element hasher for half-edge j uses index j.
"""

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .algebra import GroupElement, GroupSpec, decode, inverse_arrays, multiply_arrays
from .errors import SketchConfigError
from .pattern import Pattern

logger = logging.getLogger(__name__)

MERSENNE_PRIME = (1 << 61) - 1
MASK64 = (1 << 64) - 1
COLOR_HASHER_INDEX = 0

_P = np.uint64(MERSENNE_PRIME)
_LOW31 = np.uint64((1 << 31) - 1)
_LOW30 = np.uint64((1 << 30) - 1)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S61 = np.uint64(61)
_ONE = np.uint64(1)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S27 = np.uint64(27)

Coloring = Union[Mapping[int, int], Callable[[int], int]]
XOverride = Callable[[int, int], GroupElement]


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array, wrapping modulo 2^64."""
    x = np.asarray(x, dtype=np.uint64) + _GOLDEN
    x = (x ^ (x >> _S30)) * _MIX1
    x = (x ^ (x >> _S27)) * _MIX2
    return x ^ (x >> _S31)


def field_key(v: int) -> int:
    """Field element a vertex id is hashed at."""
    return mix64(v & MASK64) % MERSENNE_PRIME


def derive_seed(master_seed: int, *indices: int) -> int:
    """Deterministic 64-bit child seed for (master_seed, indices...)."""
    value = mix64(master_seed & MASK64)
    for index in indices:
        value = mix64(value ^ mix64(index & MASK64))
    return value


def _reduce(x: np.ndarray) -> np.ndarray:
    # x < 2^64 -> x mod p, using 2^61 = 1 (mod p)
    x = (x & _P) + (x >> _S61)
    x = (x & _P) + (x >> _S61)
    return np.where(x >= _P, x - _P, x)


def mulmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b) mod p for uint64 arrays with entries below p."""
    a_hi, a_lo = a >> _S31, a & _LOW31
    b_hi, b_lo = b >> _S31, b & _LOW31
    # a*b = hi*2^62 + mid*2^31 + lo and 2^62 = 2 (mod p)
    high = (a_hi * b_hi) << _ONE
    mid = a_hi * b_lo + a_lo * b_hi
    mid = (mid >> _S30) + ((mid & _LOW30) << _S31)
    low = _reduce(a_lo * b_lo)
    return _reduce(_reduce(high + mid) + low)


@dataclass(frozen=True)
class IndependentHasher:
    """Polynomial hash over GF(2^61 - 1); coefficients[0] is the constant term."""

    coefficients: Tuple[int, ...]
    range: int

    @classmethod
    def from_seed(cls, master_seed: int, hasher_index: int, independence: int, range_: int) -> "IndependentHasher":
        coefficients = tuple(derive_seed(master_seed, hasher_index, j) % MERSENNE_PRIME
                             for j in range(independence))
        return cls(coefficients, range_)

    def field_value(self, v: int) -> int:
        x = field_key(v)
        acc = 0
        for c in reversed(self.coefficients):
            acc = (acc * x + c) % MERSENNE_PRIME
        return acc

    def __call__(self, v: int) -> int:
        return self.field_value(v) % self.range

    def evaluate(self, vertices: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an array of vertex ids."""
        x = _reduce(mix64_array(vertices))
        acc = np.zeros_like(x)
        for c in reversed(self.coefficients):
            acc = _reduce(mulmod(acc, x) + np.uint64(c))
        return (acc % np.uint64(self.range)).astype(np.int64)


@dataclass
class HalfEdgeHashes:
    """
    The functions X_1..X_2k and the coloring for one sketch instance.

    Only non-distinguished half-edges own a hasher; the distinguished X at b is
    the product of inverses of the others at b, so the product over Γ(b) is the
    identity at every vertex. The coloring and X values can be replaced for
    tests through `coloring` and `x_override`.
    """

    pattern: Pattern
    spec: GroupSpec
    colors: int
    seed: int
    element_hashers: Dict[int, IndependentHasher]
    color_hasher: IndependentHasher
    coloring: Optional[Coloring] = field(default=None, repr=False)
    x_override: Optional[XOverride] = field(default=None, repr=False)

    def eval_x(self, half_edge: int, v: int) -> GroupElement:
        exp, sign = self.x_arrays(half_edge, np.asarray([v], dtype=np.uint64))
        return GroupElement(int(exp[0]), int(sign[0]))

    def eval_color(self, v: int) -> int:
        """Color of v in 1..C."""
        return int(self.color_array(np.asarray([v], dtype=np.uint64))[0]) + 1

    def color_array(self, vertices: np.ndarray) -> np.ndarray:
        """0-based colors for an array of vertex ids."""
        if self.coloring is None:
            return self.color_hasher.evaluate(vertices)
        lookup = self.coloring.__getitem__ if isinstance(self.coloring, Mapping) else self.coloring
        colors = np.fromiter((lookup(int(v)) for v in vertices), dtype=np.int64, count=len(vertices))
        if colors.size and (colors.min() < 1 or colors.max() > self.colors):
            raise SketchConfigError(f"injected coloring must use colors in 1..{self.colors}")
        return colors - 1

    def x_arrays(self, half_edge: int, vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """X_j over an array of vertex ids, as (exponent, sign) arrays."""
        if self.x_override is not None:
            values = [self.x_override(half_edge, int(v)) for v in vertices]
            return (np.array([g.exponent for g in values], dtype=np.int64),
                    np.array([g.sign for g in values], dtype=np.int64))
        hasher = self.element_hashers.get(half_edge)
        if hasher is not None:
            return decode(hasher.evaluate(vertices), self.spec)

        others = {j: decode(self.element_hashers[j].evaluate(vertices), self.spec)
                  for j in self.pattern.gamma[self.pattern.half_edge_vertex(half_edge)] if j != half_edge}
        return self._distinguished(half_edge, others, len(vertices))

    def x_table(self, vertices: np.ndarray) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
        """X_j for every half-edge j over the same vertex block, each hasher evaluated once."""
        if self.x_override is not None:
            return {j: self.x_arrays(j, vertices) for j in range(1, 2 * self.pattern.k + 1)}
        table = {j: decode(hasher.evaluate(vertices), self.spec) for j, hasher in self.element_hashers.items()}
        for j in self.pattern.distinguished.values():
            table[j] = self._distinguished(j, table, len(vertices))
        return table

    def _distinguished(self, half_edge: int, values: Mapping[int, Tuple[np.ndarray, np.ndarray]],
                       count: int) -> Tuple[np.ndarray, np.ndarray]:
        exp = np.zeros(count, dtype=np.int64)
        sign = np.ones(count, dtype=np.int64)
        for j in self.pattern.gamma[self.pattern.half_edge_vertex(half_edge)]:
            if j == half_edge:
                continue
            other_exp, other_sign = inverse_arrays(*values[j], self.spec)
            exp, sign = multiply_arrays(exp, sign, other_exp, other_sign, self.spec)
        return exp, sign


def build_hashes(pattern: Pattern, spec: GroupSpec, colors: int, master_seed: int, *,
                 coloring: Optional[Coloring] = None,
                 x_override: Optional[XOverride] = None) -> HalfEdgeHashes:
    """
    Draw the 2k - t element hashers and the color hasher for one instance.

    Raises:
        SketchConfigError: if colors < t.
    """
    if colors < pattern.t:
        raise SketchConfigError(f"need at least t={pattern.t} colors, got {colors}")
    independence = 4 * pattern.k
    element_hashers = {
        j: IndependentHasher.from_seed(master_seed, j, independence, spec.order)
        for j in pattern.non_distinguished
    }
    color_hasher = IndependentHasher.from_seed(master_seed, COLOR_HASHER_INDEX, independence, colors)
    return HalfEdgeHashes(
        pattern=pattern,
        spec=spec,
        colors=colors,
        seed=master_seed,
        element_hashers=element_hashers,
        color_hasher=color_hasher,
        coloring=coloring,
        x_override=x_override,
    )
