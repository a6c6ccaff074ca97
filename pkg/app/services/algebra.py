"""
Finite groups of diagonal matrices with zero mean, kept in exponent form.

Two kinds are supported: the r-th roots of unity (matrix dimension 1) and the
2d signed powers {±I, ±M, ..., ±M^(d-1)} with M = diag(1, ω, ..., ω^(d-1)),
ω = e^(2πi/d). Elements never materialize as matrices; an Accumulator holds
the diagonal of a sum of elements as a complex vector.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator, Tuple

import numpy as np
import numpy.typing as npt

from .errors import GroupSpecError

Accumulator = npt.NDArray[np.complex128]


class GroupKind(str, Enum):
    ROOTS = "roots"
    MATRIX = "matrix"


@dataclass(frozen=True)
class GroupSpec:
    kind: GroupKind
    size: int  # r for roots of unity, d for signed powers

    def __post_init__(self):
        if self.size < 2:
            raise GroupSpecError(f"{self.kind.value} group needs a parameter >= 2, got {self.size}")

    @classmethod
    def roots(cls, r: int) -> "GroupSpec":
        return cls(GroupKind.ROOTS, r)

    @classmethod
    def matrix(cls, d: int) -> "GroupSpec":
        return cls(GroupKind.MATRIX, d)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse the CLI form `roots:<r>` or `matrix:<d>`."""
        kind_text, sep, size_text = text.strip().partition(":")
        try:
            kind = GroupKind(kind_text.lower())
        except ValueError:
            raise GroupSpecError(f"unknown group kind in {text!r}; use roots:<r> or matrix:<d>")
        if not sep or not size_text.isdigit():
            raise GroupSpecError(f"missing group size in {text!r}; use roots:<r> or matrix:<d>")
        return cls(kind, int(size_text))

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.size}"

    @property
    def order(self) -> int:
        """|G|: r for roots of unity, 2d for signed powers."""
        return self.size if self.kind is GroupKind.ROOTS else 2 * self.size

    @property
    def dim(self) -> int:
        return 1 if self.kind is GroupKind.ROOTS else self.size

    @property
    def signed(self) -> bool:
        return self.kind is GroupKind.MATRIX

    @cached_property
    def omega_powers(self) -> npt.NDArray[np.complex128]:
        """ω^j for j in 0..size-1, ω = e^(2πi/size)."""
        j = np.arange(self.size)
        powers = np.exp(2j * np.pi * j / self.size)
        # Quarter turns are exact so r = 4 stays in {±1, ±i}.
        for index in range(self.size):
            if (4 * index) % self.size == 0:
                quarter = (4 * index) // self.size
                powers[index] = (1, 1j, -1, -1j)[quarter]
        return powers

    @cached_property
    def embedding_table(self) -> npt.NDArray[np.complex128]:
        """Rows indexed by exponent: the diagonal of M^exp (or the root ω^exp)."""
        if self.kind is GroupKind.ROOTS:
            return self.omega_powers.reshape(self.size, 1)
        exps = np.arange(self.size)
        return self.omega_powers[np.outer(exps, exps) % self.size]

    def elements(self) -> Iterator["GroupElement"]:
        signs = (1, -1) if self.signed else (1,)
        for sign in signs:
            for exponent in range(self.size):
                yield GroupElement(exponent, sign)

    def identity(self) -> "GroupElement":
        return GroupElement(0, 1)


@dataclass(frozen=True)
class GroupElement:
    exponent: int
    sign: int = 1


def multiply(a: GroupElement, b: GroupElement, spec: GroupSpec) -> GroupElement:
    return GroupElement((a.exponent + b.exponent) % spec.size, a.sign * b.sign)


def inverse(a: GroupElement, spec: GroupSpec) -> GroupElement:
    return GroupElement((-a.exponent) % spec.size, a.sign)


def embed(a: GroupElement, spec: GroupSpec) -> Accumulator:
    return a.sign * spec.embedding_table[a.exponent % spec.size].copy()


def trace(acc: Accumulator) -> complex:
    return complex(np.sum(acc))


def zero_accumulator(spec: GroupSpec) -> Accumulator:
    return np.zeros(spec.dim, dtype=np.complex128)


def accumulator_add(a: Accumulator, b: Accumulator) -> Accumulator:
    return a + b


def accumulator_sub(a: Accumulator, b: Accumulator) -> Accumulator:
    return a - b


def accumulator_mul(a: Accumulator, b: Accumulator) -> Accumulator:
    # Entrywise: every element is diagonal.
    return a * b


# Vectorized forms used by the sketch: elements as parallel (exponent, sign) arrays.

def decode(codes: npt.NDArray[np.integer], spec: GroupSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Split hash codes in [0, order) into exponent and sign arrays."""
    codes = np.asarray(codes, dtype=np.int64)
    if not spec.signed:
        return codes % spec.size, np.ones_like(codes)
    return codes % spec.size, np.where(codes >= spec.size, -1, 1)


def multiply_arrays(exp_a: np.ndarray, sign_a: np.ndarray, exp_b: np.ndarray, sign_b: np.ndarray,
                    spec: GroupSpec) -> Tuple[np.ndarray, np.ndarray]:
    return (exp_a + exp_b) % spec.size, sign_a * sign_b


def inverse_arrays(exp: np.ndarray, sign: np.ndarray, spec: GroupSpec) -> Tuple[np.ndarray, np.ndarray]:
    return (-exp) % spec.size, sign
