import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.services.algebra import (GroupElement, GroupKind, GroupSpec, accumulator_add, accumulator_mul, accumulator_sub,
                                  decode, embed, inverse, multiply, trace, zero_accumulator)
from app.services.errors import GroupSpecError

SPECS = [GroupSpec.roots(2), GroupSpec.roots(3), GroupSpec.roots(4), GroupSpec.roots(6),
         GroupSpec.matrix(2), GroupSpec.matrix(5), GroupSpec.matrix(8)]


class TestGroupSpec:
    """Parsing and shape of the two group kinds."""

    def test_parse(self):
        """CLI text round-trips through str."""
        assert GroupSpec.parse("roots:4") == GroupSpec(GroupKind.ROOTS, 4)
        assert GroupSpec.parse("matrix:16") == GroupSpec(GroupKind.MATRIX, 16)
        assert str(GroupSpec.parse("matrix:16")) == "matrix:16"

    @pytest.mark.parametrize("text", ["roots", "roots:", "cube:3", "matrix:x", "roots:1", "matrix:0"])
    def test_parse_errors(self, text):
        """Unknown kinds, missing sizes and sizes below 2 are rejected."""
        with pytest.raises(GroupSpecError):
            GroupSpec.parse(text)

    def test_order_and_dim(self):
        """Roots of unity are scalars; signed powers of M have 2d elements of dimension d."""
        assert (GroupSpec.roots(4).order, GroupSpec.roots(4).dim) == (4, 1)
        assert (GroupSpec.matrix(8).order, GroupSpec.matrix(8).dim) == (16, 8)
        assert len(list(GroupSpec.matrix(3).elements())) == 6

    def test_quarter_turns_exact(self):
        """The fourth roots of unity are exactly 1, i, -1, -i."""
        table = GroupSpec.roots(4).embedding_table[:, 0]
        assert table.tolist() == [1, 1j, -1, -1j]
        assert GroupSpec.matrix(8).omega_powers[2] == 1j


class TestGroupOperations:
    """Group laws and the embedding into diagonal matrices."""

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_zero_mean(self, spec):
        """The sum of all group elements is the zero matrix."""
        total = zero_accumulator(spec)
        for element in spec.elements():
            total = accumulator_add(total, embed(element, spec))
        np.testing.assert_allclose(total, 0, atol=1e-12)
        identity = embed(spec.identity(), spec)
        assert not accumulator_sub(identity, identity).any()

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_embedding_is_homomorphism(self, spec):
        """embed(a b) = embed(a) embed(b) entrywise."""
        elements = list(spec.elements())
        for a in elements:
            for b in elements:
                np.testing.assert_allclose(embed(multiply(a, b, spec), spec),
                                           accumulator_mul(embed(a, spec), embed(b, spec)), atol=1e-12)

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_inverse(self, spec):
        """a a^-1 is the identity with trace d."""
        for a in spec.elements():
            product = multiply(a, inverse(a, spec), spec)
            assert product == spec.identity()
            assert trace(embed(product, spec)) == pytest.approx(spec.dim)

    def test_non_identity_trace(self):
        """Only the identity has trace d among signed powers."""
        spec = GroupSpec.matrix(6)
        for element in spec.elements():
            expected = 6 if element == spec.identity() else (-6 if element == GroupElement(0, -1) else 0)
            assert trace(embed(element, spec)) == pytest.approx(expected, abs=1e-9)

    def test_decode(self):
        """Codes below d are positive powers, codes from d on carry the sign."""
        exps, signs = decode(np.array([0, 3, 4, 7]), GroupSpec.matrix(4))
        assert exps.tolist() == [0, 3, 0, 3]
        assert signs.tolist() == [1, 1, -1, -1]
        exps, signs = decode(np.array([0, 3]), GroupSpec.roots(4))
        assert exps.tolist() == [0, 3]
        assert signs.tolist() == [1, 1]
