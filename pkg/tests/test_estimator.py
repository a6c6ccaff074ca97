import math
import os
import sys

import numpy as np
import pytest
from scipy import stats

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.schemas import EnsembleDump
from app.services.algebra import GroupSpec
from app.services.errors import PlanError, SketchConfigError
from app.services.estimator import (Ensemble, PlanInput, explore_target_count, final_work, instance_seed,
                                    manual_plan, plan_parameters, round_half_up, run_ensemble)
from app.services.hashing import derive_seed
from app.services.oracle import exact_count, replay
from app.services.pattern import builtin_pattern
from app.services.sketch import Algorithm
from app.services.streamio import EdgeEvent, generate_events

TRIANGLE = builtin_pattern("triangle")
CYCLE4 = builtin_pattern("cycle4")


def plan(m, alpha, target, pattern=TRIANGLE, **kwargs):
    return plan_parameters(PlanInput(m=m, alpha=alpha, target_count=target, pattern=pattern, **kwargs),
                           default_roots=4, max_matrix_dim=64)


class TestPlanner:
    """Parameter planning from m, alpha and a target count."""

    def test_cube_root_binds(self):
        """m = 10^6, alpha = 1/4: m^(1/3) = 100 is the smallest bound."""
        p = plan(10 ** 6, 0.25, 1000)
        assert p.colors == 100
        assert p.color_bounds["degree_cap"] == pytest.approx(1000)
        assert p.color_bounds["cube_root"] == pytest.approx(100)
        assert p.color_bounds["count_bound"] == pytest.approx(10_000)
        assert p.instance_factor == pytest.approx(1e6)
        assert p.group == "matrix:64"
        assert p.instances == 15625

    def test_matrix_branch(self):
        """m = 10^4, target 100: C = 21, f = 10^8 / 21^3, d capped at 64."""
        p = plan(10 ** 4, 0.25, 100)
        assert p.colors == 21
        assert p.instance_factor == pytest.approx(1e8 / 21 ** 3)
        assert p.group == "matrix:64"
        assert p.instances == round_half_up(1e8 / 21 ** 3 / 64) == 169
        assert p.storage_cells == 169 * 3 * 21 * 21 * 64

    def test_roots_branch(self):
        """m = 1000, target 10^4: the count bound is below t, f < 1, roots of unity suffice."""
        p = plan(1000, 0.25, 10_000)
        assert p.color_bounds["count_bound"] == pytest.approx(10 ** (1 / 3))
        assert p.colors == 3
        assert p.group == "roots:4"
        assert p.instances == 10
        assert p.final_work == 6 * 3 * 1

    def test_small_instance_factor_uses_d_of_two(self):
        """A matrix group never has d below 2."""
        p = plan(1000, 0.25, 900)
        f = p.instance_factor
        assert 1 < f < 1.5
        assert p.group == "matrix:2"
        assert p.instances == max(1, round_half_up(f / 2))

    def test_round_half_up(self):
        """Halves round up."""
        assert [round_half_up(x) for x in (0.5, 1.5, 2.5, 2.49)] == [1, 2, 3, 2]

    def test_zero_target(self):
        """The planner needs a positive target count."""
        with pytest.raises(PlanError):
            plan(1000, 0.25, 0)

    def test_bad_alpha(self):
        """alpha must be positive."""
        with pytest.raises(PlanError):
            plan(1000, 0.0, 10)

    def test_degree_warning(self):
        """A maximum degree above m^(1/2 - alpha) is reported."""
        assert plan(10 ** 4, 0.25, 100, delta_max=5).warnings == []
        warnings = plan(10 ** 4, 0.25, 100, delta_max=50).warnings
        assert len(warnings) == 1
        assert "max degree" in warnings[0]

    def test_time_budget_lowers_colors(self):
        """C drops until the final computation fits the budget."""
        p = plan(10 ** 6, 0.25, 1000, time_budget=10 ** 6)
        assert p.colors == 18
        assert p.final_work == 18 * 17 * 16 * 3 * 64
        assert p.final_work <= 10 ** 6

    def test_time_budget_floor_is_t(self):
        """An impossible time budget stops at C = t with a warning."""
        p = plan(10 ** 6, 0.25, 1000, time_budget=1)
        assert p.colors == 3
        assert any("budget" in w for w in p.warnings)

    def test_storage_budget(self):
        """A storage budget below the plan is an error; a generous one passes."""
        with pytest.raises(PlanError):
            plan(10 ** 4, 0.25, 100, storage_budget=10 ** 6)
        assert plan(10 ** 4, 0.25, 100, storage_budget=10 ** 9).storage_cells <= 10 ** 9

    def test_instances_override(self):
        """An explicit instance count replaces the planned one."""
        assert plan(10 ** 4, 0.25, 100, instances=7).instances == 7

    def test_relative_variance(self):
        """In the roots branch N follows the desired relative variance."""
        assert plan(1000, 0.25, 10_000, relative_variance=0.04).instances == 25

    def test_cycle4_final_work(self):
        """The 4-cycle is finalized in C^3 work."""
        assert final_work(CYCLE4, 10, 4) == 10 ** 3 * 4 * 4
        assert final_work(TRIANGLE, 10, 4) == 720 * 3 * 4

    @pytest.mark.parametrize("field, value", [
        ("relative_variance", 0.0),
        ("relative_variance", -0.5),
        ("time_budget", 0),
        ("storage_budget", -10),
    ])
    def test_non_positive_knobs(self, field, value):
        """Relative variance and budgets must be positive."""
        with pytest.raises(PlanError):
            plan(1000, 0.25, 10_000, **{field: value})

    def test_ensemble_variance_within_target(self):
        """Over random inputs, variance proxy / N stays within target^2 up to half-up rounding."""
        rng = np.random.default_rng(2718)
        patterns = [builtin_pattern(name) for name in ("triangle", "cycle4", "cycle5", "k4", "diamond")]
        for _ in range(300):
            pattern = patterns[int(rng.integers(0, len(patterns)))]
            m = int(rng.integers(10, 10 ** 7))
            alpha = float(rng.uniform(0.05, 0.5))
            target = int(rng.integers(1, 10 ** 5))
            p = plan(m, alpha, target, pattern)
            assert p.colors >= pattern.t
            assert p.instances >= 1
            assert p.variance_proxy / p.instances <= 1.5 * target ** 2 * (1 + 1e-9), (pattern.label, m, target)


class TestEnsemble:
    """N instances fed from one pass."""

    def test_deterministic(self):
        """Same master seed, same report."""
        events = generate_events(20, 40, 8, seed=1)
        p = manual_plan(TRIANGLE, 5, GroupSpec.matrix(4), 6)
        a = run_ensemble(events, TRIANGLE, p, master_seed=123)
        b = run_ensemble(events, TRIANGLE, p, master_seed=123)
        assert a == b
        assert a.seeds == [instance_seed(123, i) for i in range(6)]
        assert a.seeds == [derive_seed(123, i) for i in range(6)]
        assert len(set(a.estimates)) > 1
        assert run_ensemble(events, TRIANGLE, p, master_seed=124).estimates != a.estimates

    def test_report_fields(self):
        """The report echoes plan, algorithm, finalizer and stream statistics."""
        events = generate_events(20, 40, 8, churn=5, seed=2)
        p = manual_plan(CYCLE4, 6, GroupSpec.roots(4), 4)
        report = run_ensemble(events, CYCLE4, p, master_seed=1)
        assert report.algorithm == 1
        assert report.finalizer == "cycle4"
        assert report.plan == p
        assert len(report.estimates) == 4
        assert report.mean == pytest.approx(np.mean(report.estimates))
        assert report.std_error == pytest.approx(np.std(report.estimates, ddof=1) / 2)
        assert report.stream["events"] == 50
        assert report.stream["net_edges"] == 40
        assert report.stream["directed_edges"] == 80

    def test_naive_and_fast_agree(self):
        """Forcing the naive finalizer on the 4-cycle gives the same estimates."""
        events = generate_events(20, 45, 8, seed=3)
        p = manual_plan(CYCLE4, 6, GroupSpec.matrix(2), 3)
        fast = run_ensemble(events, CYCLE4, p, master_seed=5)
        naive = run_ensemble(events, CYCLE4, p, master_seed=5, fast_cycle4=False)
        assert naive.finalizer == "naive"
        np.testing.assert_allclose(fast.estimates, naive.estimates, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("d", [2, 8, 32])
    def test_update_work_independent_of_dimension(self, d):
        """Every event touches 2k cells in each of the N instances, whatever d is."""
        events = generate_events(25, 60, 8, churn=10, seed=11)
        p = manual_plan(CYCLE4, 5, GroupSpec.matrix(d), 3)
        ensemble = Ensemble(CYCLE4, p, 4)
        ensemble.ingest(events, 16)
        assert len(events) == 80
        assert ensemble.cells_touched == 3 * 2 * CYCLE4.k * len(events)

    def test_fast_needs_cycle4(self):
        """The 4-cycle finalizer cannot be forced on other patterns."""
        p = manual_plan(TRIANGLE, 4, GroupSpec.roots(4), 2)
        with pytest.raises(SketchConfigError):
            run_ensemble(generate_events(10, 10, 4, seed=1), TRIANGLE, p, master_seed=0, fast_cycle4=True)

    def test_batch_size_irrelevant(self):
        """Exact counting makes the batch size invisible."""
        events = generate_events(25, 60, 8, churn=10, seed=4)
        p = manual_plan(TRIANGLE, 5, GroupSpec.matrix(4), 3)
        assert (run_ensemble(events, TRIANGLE, p, 9, batch_size=1)
                == run_ensemble(events, TRIANGLE, p, 9, batch_size=4096))

    def test_algorithm_choice(self):
        """Signed groups default to exact counting; roots of unity to accumulation."""
        assert Ensemble(TRIANGLE, manual_plan(TRIANGLE, 3, GroupSpec.matrix(2), 1), 0).algorithm is Algorithm.COUNT
        assert Ensemble(TRIANGLE, manual_plan(TRIANGLE, 3, GroupSpec.roots(4), 1), 0).algorithm is Algorithm.ACCUMULATE

    def test_dump_and_merge(self):
        """Ensembles over two halves of a stream merge, through JSON, into the single-pass result."""
        events = generate_events(30, 80, 9, churn=20, seed=6)
        p = manual_plan(TRIANGLE, 5, GroupSpec.matrix(4), 4)
        full = Ensemble(TRIANGLE, p, 77)
        full.ingest(events)
        parts = []
        for half in (events[:55], events[55:]):
            ensemble = Ensemble(TRIANGLE, p, 77)
            ensemble.ingest(half)
            text = ensemble.to_dump().model_dump_json()
            parts.append(Ensemble.from_dump(EnsembleDump.model_validate_json(text)))
        merged = parts[0].merge(parts[1])
        assert all(a.same_counters(b) for a, b in zip(merged.states, full.states))
        assert merged.report().estimates == full.report().estimates
        assert merged.stream["net_edges"] == full.stream["net_edges"]
        assert merged.stream["events"] == len(events)

    def test_merge_needs_same_master_seed(self):
        """Different master seeds do not merge."""
        p = manual_plan(TRIANGLE, 3, GroupSpec.matrix(2), 2)
        with pytest.raises(SketchConfigError):
            Ensemble(TRIANGLE, p, 1).merge(Ensemble(TRIANGLE, p, 2))

    def test_manual_plan_errors(self):
        """Too few colors or instances."""
        with pytest.raises(SketchConfigError):
            manual_plan(CYCLE4, 3, GroupSpec.roots(4), 1)
        with pytest.raises(SketchConfigError):
            manual_plan(CYCLE4, 4, GroupSpec.roots(4), 0)

    def test_explore_target_count(self):
        """The pilot estimate is a positive integer."""
        events = generate_events(20, 40, 8, planted=[(TRIANGLE, 3)], seed=7)
        target = explore_target_count(events, TRIANGLE, master_seed=3)
        assert isinstance(target, int)
        assert target >= 1


class TestUnbiasedness:
    """Ensemble means agree with the exact count."""

    @pytest.mark.slow
    @pytest.mark.parametrize("pattern,colors", [(TRIANGLE, 8), (CYCLE4, 10)], ids=["triangle", "cycle4"])
    def test_mean_matches_oracle(self, pattern, colors):
        """5000 instances land within four standard errors of the exact count."""
        events = generate_events(40, 150, 12, seed=2024)
        expected = exact_count(replay(events), pattern)
        p = manual_plan(pattern, colors, GroupSpec.roots(4), 5000)
        report = run_ensemble(events, pattern, p, master_seed=31337)
        assert abs(report.mean - expected) <= 4 * report.std_error

    def test_ids_a_prime_apart(self):
        """A triangle whose ids differ by 2^61 - 1 is counted like any other triangle."""
        prime = (1 << 61) - 1
        events = [EdgeEvent.insert(5, prime + 5), EdgeEvent.insert(prime + 5, 7), EdgeEvent.insert(7, 5)]
        p = manual_plan(TRIANGLE, 8, GroupSpec.roots(4), 400)
        report = run_ensemble(events, TRIANGLE, p, master_seed=61)
        assert max(abs(e) for e in report.estimates) > 0
        assert abs(report.mean - 1) <= 5 * report.std_error


class TestVariance:
    """More colors, less variance on a degree-capped stream."""

    @pytest.mark.slow
    def test_more_colors_lower_variance(self):
        """Single-instance variance for the 4-cycle drops from C = 4 to C = 16 and respects the bound at C = 12."""
        events = generate_events(2500, 10_000, 11, seed=99)
        m = 2 * 10_000
        expected = exact_count(replay(events), CYCLE4)

        def sample_variance(colors, instances):
            p = manual_plan(CYCLE4, colors, GroupSpec.roots(4), instances, m=m)
            report = run_ensemble(events, CYCLE4, p, master_seed=colors)
            return float(np.var(report.estimates, ddof=1))

        low_colors = sample_variance(4, 5000)
        high_colors = sample_variance(16, 5000)
        ratio = low_colors / high_colors
        assert stats.f.sf(ratio, 4999, 4999) < 0.01

        bound = expected ** 2 + m ** CYCLE4.k / (1 * 12 ** (2 * CYCLE4.k - CYCLE4.t))
        assert sample_variance(12, 2000) <= 10 * bound
        assert math.isfinite(bound)
