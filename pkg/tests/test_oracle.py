import os
import sys
from itertools import combinations, permutations

import networkx as nx
import pytest
from networkx.algorithms.isomorphism import GraphMatcher

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.services.errors import MotifSketchError, StreamConsistencyError
from app.services.oracle import (MaterializedGraph, count_injective_homomorphisms, exact_compatible_count,
                                 exact_count, replay)
from app.services.pattern import BUILTIN_PATTERNS, builtin_pattern, parse_pattern
from app.services.streamio import generate_events, parse_stream

K4_STREAM = "1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n"


def clique_stream(n: int) -> str:
    return "".join(f"{u} {v}\n" for u, v in combinations(range(n), 2))


def networkx_count(g: MaterializedGraph, name: str) -> int:
    """Subgraph monomorphisms found by networkx, divided by auto(H)."""
    pattern = builtin_pattern(name)
    matcher = GraphMatcher(g.graph, pattern.undirected_graph())
    return sum(1 for _ in matcher.subgraph_monomorphisms_iter()) // pattern.auto_count


class TestReplay:
    """Strict replay of a stream into a simple graph."""

    def test_insert_delete(self):
        """Deletions remove edges and isolated vertices."""
        g = replay(parse_stream("1 2\n2 3\n- 1 2\n"))
        assert g.edge_set() == {frozenset((2, 3))}
        assert g.vertex_count == 2

    def test_double_insert(self):
        """Inserting a present edge is inconsistent, in either orientation."""
        with pytest.raises(StreamConsistencyError) as excinfo:
            replay(parse_stream("1 2\n2 1\n"))
        assert "event 2" in str(excinfo.value)

    def test_delete_absent(self):
        """Deleting an absent edge is inconsistent."""
        with pytest.raises(StreamConsistencyError):
            replay(parse_stream("1 2\n- 2 3\n"))


class TestExactCount:
    """Brute-force copy counts."""

    def test_k4(self):
        """K4 holds 4 triangles, 3 four-cycles, 6 diamonds and one K4."""
        g = replay(parse_stream(K4_STREAM))
        assert exact_count(g, builtin_pattern("triangle")) == 4
        assert exact_count(g, builtin_pattern("cycle4")) == 3
        assert exact_count(g, builtin_pattern("diamond")) == 6
        assert exact_count(g, builtin_pattern("k4")) == 1
        assert exact_count(g, builtin_pattern("cycle5")) == 0

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
    def test_clique_identity(self, n):
        """In K_n the pattern K_t has C(n, t) copies."""
        g = replay(parse_stream(clique_stream(n)))
        assert exact_count(g, builtin_pattern("triangle")) == len(list(combinations(range(n), 3)))
        assert exact_count(g, builtin_pattern("k4")) == len(list(combinations(range(n), 4)))

    def test_orientation_invariant(self):
        """Reversing pattern edges does not change the count."""
        g = replay(generate_events(20, 50, 8, seed=9))
        forward = parse_pattern("4 4\n1 2\n2 3\n3 4\n4 1\n")
        reversed_ = parse_pattern("4 4\n2 1\n3 2\n4 3\n1 4\n")
        assert exact_count(g, forward) == exact_count(g, reversed_)

    @pytest.mark.parametrize("name", sorted(BUILTIN_PATTERNS))
    def test_matches_networkx(self, name):
        """Counts agree with networkx subgraph monomorphisms."""
        g = replay(generate_events(25, 70, 9, planted=[(builtin_pattern(name), 2)], seed=len(name)))
        assert exact_count(g, builtin_pattern(name)) == networkx_count(g, name)

    def test_deletions_respected(self):
        """Only the net graph counts."""
        g = replay(parse_stream(K4_STREAM + "- 3 4\n"))
        assert exact_count(g, builtin_pattern("triangle")) == 2
        assert exact_count(g, builtin_pattern("k4")) == 0


class TestCompatibleCount:
    """Counts of injective homomorphisms matching a color tuple."""

    def test_single_triangle(self):
        """A fixed color tuple pins every pattern vertex of a rainbow triangle, so one map remains."""
        g = replay(parse_stream("10 20\n20 30\n30 10\n"))
        coloring = {10: 1, 20: 2, 30: 3}
        pattern = builtin_pattern("triangle")
        assert exact_compatible_count(g, pattern, coloring, (1, 2, 3)) == 1
        total = sum(exact_compatible_count(g, pattern, coloring, colors) for colors in permutations((1, 2, 3)))
        assert total == pattern.auto_count * exact_count(g, pattern)

    def test_sum_over_tuples(self):
        """With a rainbow coloring the tuple counts add up to auto(H) times the copy count."""
        g = replay(parse_stream(clique_stream(5)))
        coloring = {v: v + 1 for v in range(5)}
        pattern = builtin_pattern("cycle4")
        total = sum(exact_compatible_count(g, pattern, coloring, colors)
                    for colors in permutations(range(1, 6), 4))
        assert total == pattern.auto_count * exact_count(g, pattern)
        assert total == count_injective_homomorphisms(g, pattern)

    def test_bad_tuple(self):
        """Tuples must have t distinct colors."""
        g = replay(parse_stream(K4_STREAM))
        with pytest.raises(MotifSketchError):
            exact_compatible_count(g, builtin_pattern("triangle"), {}, (1, 1, 2))


class TestGraphView:
    """MaterializedGraph bookkeeping."""

    def test_self_loop(self):
        """Self-loops are inconsistent."""
        g = MaterializedGraph()
        with pytest.raises(StreamConsistencyError):
            g.insert(3, 3)

    def test_degree(self):
        """Maximum degree of a star."""
        g = MaterializedGraph()
        for v in range(1, 6):
            g.insert(0, v)
        assert g.max_degree == 5
        assert nx.is_tree(g.graph)
