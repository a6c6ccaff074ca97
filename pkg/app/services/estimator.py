import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..config import get_settings
from ..schemas import EnsembleDump, EstimateReport, Plan
from ..schemas.models import DUMP_VERSION
from .algebra import GroupSpec
from .errors import PlanError, SketchConfigError
from .hashing import Coloring, derive_seed
from .pattern import Pattern, parse_pattern
from .sketch import Algorithm, SketchConfig, SketchEstimate, SketchState, falling_factorial, merge
from .streamio import EdgeEvent, StreamStats, iter_batches, stream_stats

logger = logging.getLogger(__name__)

ADDITIVE_STREAM_FIELDS = ("events", "inserts", "deletes", "net_edges", "directed_edges")
EXPLORATION_INSTANCES = 64
EXPLORATION_ROOTS = 4


@dataclass(frozen=True)
class PlanInput:
    """Planner input; m counts directed edges (twice the undirected edge count)."""

    m: int
    alpha: float
    target_count: int
    pattern: Pattern
    delta_max: Optional[int] = None
    storage_budget: Optional[int] = None
    time_budget: Optional[int] = None
    relative_variance: float = 0.1
    instances: Optional[int] = None


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _floor(x: float) -> int:
    # m ** (1/3) lands a hair below integers such as 100
    return int(math.floor(x + 1e-9))


def _exp(x: float) -> float:
    # planner quantities are ratios of powers of m; keep them finite
    return math.exp(min(x, 700.0))


def final_work(pattern: Pattern, colors: int, dim: int) -> int:
    """Work units of the final computation: colour tuples (or C^3 for the 4-cycle) times k times d."""
    tuples = colors ** 3 if pattern.is_cycle4 else falling_factorial(colors, pattern.t)
    return tuples * pattern.k * dim


def instance_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, index)


def _choose_group(pattern: Pattern, log_m: float, log_target: float, colors: int, relative_variance: float,
                  default_roots: int, max_matrix_dim: int):
    excess = 2 * pattern.k - pattern.t
    instance_factor = _exp(pattern.k * log_m - 2 * log_target - excess * math.log(colors))
    if instance_factor > 1:
        d = min(max(round_half_up(instance_factor), 2), max_matrix_dim)
        return GroupSpec.matrix(d), max(1, round_half_up(instance_factor / d)), instance_factor
    return GroupSpec.roots(default_roots), max(1, round_half_up(1 / relative_variance)), instance_factor


def plan_parameters(inp: PlanInput, *, default_roots: Optional[int] = None,
                    max_matrix_dim: Optional[int] = None) -> Plan:
    """
    Choose colors C, the group and the instance count.

    C = max(t, floor(min(m^(2α), m^(1/3), (m^k / X^2)^(1/(2k-t))))) for target
    count X. With f = m^k / (X^2 C^(2k-t)): if f > 1 use matrix:d with
    d = clamp(round(f), 2, d_max) and N = round(f / d); otherwise roots:r with
    N = round(1 / relative_variance). Rounding is half-up.

    Raises:
        PlanError: target count 0, alpha <= 0, a non-positive relative variance
            or budget, or a storage budget that the plan cannot meet.
    """
    settings = get_settings()
    default_roots = default_roots or settings.default_roots
    max_matrix_dim = max_matrix_dim or settings.max_matrix_dim
    pattern = inp.pattern
    if inp.target_count <= 0:
        raise PlanError("the planner needs a positive target count; supply one, "
                        "or give an input stream for an exploratory estimate")
    if inp.alpha <= 0:
        raise PlanError(f"alpha must be positive, got {inp.alpha}")
    if inp.m < 1:
        raise PlanError(f"m must be positive, got {inp.m}")
    if not inp.relative_variance > 0:
        raise PlanError(f"relative variance must be positive, got {inp.relative_variance}")
    for name, budget in (("time", inp.time_budget), ("storage", inp.storage_budget)):
        if budget is not None and budget <= 0:
            raise PlanError(f"{name} budget must be positive, got {budget}")

    warnings: List[str] = []
    log_m, log_target = math.log(inp.m), math.log(inp.target_count)
    excess = 2 * pattern.k - pattern.t
    bounds = {
        "degree_cap": inp.m ** (2 * inp.alpha),
        "cube_root": inp.m ** (1 / 3),
    }
    if excess > 0:
        bounds["count_bound"] = _exp((pattern.k * log_m - 2 * log_target) / excess)
    if inp.delta_max is not None and inp.delta_max > inp.m ** (0.5 - inp.alpha):
        message = (f"max degree {inp.delta_max} exceeds m^(1/2 - alpha) = {inp.m ** (0.5 - inp.alpha):.2f}; "
                   f"the variance bound does not apply")
        logger.warning(message)
        warnings.append(message)

    colors = max(pattern.t, _floor(min(bounds.values())))
    while True:
        spec, instances, instance_factor = _choose_group(pattern, log_m, log_target, colors, inp.relative_variance,
                                                         default_roots, max_matrix_dim)
        work = final_work(pattern, colors, spec.dim)
        if inp.time_budget is None or work <= inp.time_budget or colors == pattern.t:
            break
        colors -= 1
    if inp.time_budget is not None and work > inp.time_budget:
        message = f"final computation needs {work} work units even at C = t, above the budget {inp.time_budget}"
        logger.warning(message)
        warnings.append(message)

    if inp.instances is not None:
        instances = inp.instances
    storage = instances * pattern.k * colors * colors * spec.dim
    if inp.storage_budget is not None and storage > inp.storage_budget:
        raise PlanError(f"plan needs {storage} counter cells, above the storage budget {inp.storage_budget}")

    plan = Plan(
        colors=colors,
        group=str(spec),
        instances=instances,
        m=inp.m,
        target_count=inp.target_count,
        color_bounds=bounds,
        instance_factor=instance_factor,
        variance_proxy=_exp(pattern.k * log_m - excess * math.log(colors)) / spec.dim,
        storage_cells=storage,
        final_work=work,
        warnings=warnings,
    )
    logger.info(f"Planned {pattern.label}: C={plan.colors}, group={plan.group}, N={plan.instances}, "
                f"storage={plan.storage_cells} cells")
    return plan


def manual_plan(pattern: Pattern, colors: int, spec: GroupSpec, instances: int,
                m: int = 0, target_count: int = 0) -> Plan:
    """Plan echo for explicitly chosen parameters."""
    if colors < pattern.t:
        raise SketchConfigError(f"need at least t={pattern.t} colors, got {colors}")
    if instances < 1:
        raise SketchConfigError(f"need at least one instance, got {instances}")
    excess = 2 * pattern.k - pattern.t
    proxy = (m ** pattern.k) / (spec.dim * colors ** excess) if m else 0.0
    return Plan(
        colors=colors,
        group=str(spec),
        instances=instances,
        m=m,
        target_count=target_count,
        color_bounds={},
        instance_factor=proxy * spec.dim / target_count ** 2 if target_count else 0.0,
        variance_proxy=proxy,
        storage_cells=instances * pattern.k * colors * colors * spec.dim,
        final_work=final_work(pattern, colors, spec.dim),
    )


class Ensemble:
    """N independent instances fed from one pass over the stream; instances differ only by seed."""

    def __init__(self, pattern: Pattern, plan: Plan, master_seed: int, *,
                 algorithm: Optional[Algorithm] = None, coloring: Optional[Coloring] = None):
        spec = GroupSpec.parse(plan.group)
        if algorithm is None:
            algorithm = Algorithm.COUNT if spec.signed else Algorithm.ACCUMULATE
        self.pattern = pattern
        self.plan = plan
        self.master_seed = master_seed
        self.algorithm = Algorithm(algorithm)
        self.seeds = [instance_seed(master_seed, index) for index in range(plan.instances)]
        self.states = [
            SketchState(SketchConfig(pattern, spec, plan.colors, self.algorithm, seed), coloring=coloring)
            for seed in self.seeds
        ]
        self.stream: Dict[str, int] = StreamStats().summary()

    @property
    def cells_touched(self) -> int:
        return sum(state.cells_touched for state in self.states)

    def ingest(self, events: Iterable[EdgeEvent], batch_size: Optional[int] = None) -> None:
        batch_size = batch_size or get_settings().batch_size
        stats = StreamStats()

        def counted(source):
            for event in source:
                stats.add(event)
                yield event

        for number, batch in enumerate(iter_batches(counted(events), batch_size), start=1):
            for state in self.states:
                state.update_batch(batch)
            logger.debug(f"Applied batch {number} ({len(batch)} events) to {len(self.states)} instances")
        self.stream = stats.summary()

    def use_fast_finalizer(self, fast_cycle4: Optional[bool] = None) -> bool:
        if fast_cycle4 is None:
            return self.pattern.is_cycle4
        if fast_cycle4 and not self.pattern.is_cycle4:
            raise SketchConfigError("fast finalizer needs the 4-cycle with edges (1,2),(2,3),(3,4),(4,1)")
        return fast_cycle4

    def estimates(self, fast_cycle4: Optional[bool] = None) -> List[SketchEstimate]:
        fast = self.use_fast_finalizer(fast_cycle4)
        results = []
        for index, state in enumerate(self.states):
            estimate = state.finalize_cycle4_fast_detail() if fast else state.finalize_detail()
            logger.debug(f"Instance {index}: estimate={estimate.value:.6g}, imaginary={estimate.imaginary:.3g}")
            results.append(estimate)
        return results

    def report(self, fast_cycle4: Optional[bool] = None) -> EstimateReport:
        results = self.estimates(fast_cycle4)
        values = [result.value for result in results]
        count = len(values)
        std_error = float(np.std(values, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        report = EstimateReport(
            pattern=self.pattern.label,
            mean=math.fsum(values) / count,
            estimates=values,
            std_error=std_error,
            imaginary_mean=math.fsum(result.imaginary for result in results) / count,
            plan=self.plan,
            algorithm=int(self.algorithm),
            finalizer="cycle4" if self.use_fast_finalizer(fast_cycle4) else "naive",
            master_seed=self.master_seed,
            seeds=self.seeds,
            stream=self.stream,
        )
        logger.info(f"Ensemble of {count} instances over {self.stream.get('events', 0)} events: "
                    f"mean={report.mean:.6g} ± {report.std_error:.3g}")
        return report

    def to_dump(self) -> EnsembleDump:
        return EnsembleDump(
            master_seed=self.master_seed,
            plan=self.plan,
            stream=self.stream,
            instances=[state.to_dump() for state in self.states],
        )

    @classmethod
    def from_dump(cls, dump: EnsembleDump) -> "Ensemble":
        if dump.version != DUMP_VERSION:
            raise SketchConfigError(f"unsupported ensemble dump version {dump.version}")
        if len(dump.instances) != dump.plan.instances:
            raise SketchConfigError(f"dump holds {len(dump.instances)} instances, its plan says {dump.plan.instances}")
        if not dump.instances:
            raise SketchConfigError("dump holds no instances")
        first = dump.instances[0]
        pattern = parse_pattern(first.pattern, allow_leaves=first.allow_leaves, name=first.pattern_name)
        ensemble = cls.__new__(cls)
        ensemble.pattern = pattern
        ensemble.plan = dump.plan
        ensemble.master_seed = dump.master_seed
        ensemble.states = [SketchState.from_dump(instance) for instance in dump.instances]
        ensemble.algorithm = ensemble.states[0].config.algorithm
        ensemble.seeds = [state.config.seed for state in ensemble.states]
        ensemble.stream = dict(dump.stream)
        return ensemble

    def merge(self, other: "Ensemble") -> "Ensemble":
        """Instance-by-instance merge of two ensembles built from the same plan and master seed."""
        if self.master_seed != other.master_seed or len(self.states) != len(other.states):
            raise SketchConfigError("cannot merge ensembles with different master seeds or instance counts")
        merged = Ensemble.__new__(Ensemble)
        merged.pattern = self.pattern
        merged.plan = self.plan
        merged.master_seed = self.master_seed
        merged.algorithm = self.algorithm
        merged.seeds = list(self.seeds)
        merged.states = [merge(a, b) for a, b in zip(self.states, other.states)]
        merged.stream = {key: self.stream.get(key, 0) + other.stream.get(key, 0) for key in ADDITIVE_STREAM_FIELDS}
        return merged


def run_ensemble(events: Iterable[EdgeEvent], pattern: Pattern, plan: Plan, master_seed: int, *,
                 algorithm: Optional[Algorithm] = None, batch_size: Optional[int] = None,
                 fast_cycle4: Optional[bool] = None, coloring: Optional[Coloring] = None) -> EstimateReport:
    """Feed every instance from one pass over the stream and aggregate the finalized estimates."""
    ensemble = Ensemble(pattern, plan, master_seed, algorithm=algorithm, coloring=coloring)
    ensemble.ingest(events, batch_size)
    return ensemble.report(fast_cycle4)


def explore_target_count(events: Sequence[EdgeEvent], pattern: Pattern, master_seed: int,
                         instances: int = EXPLORATION_INSTANCES) -> int:
    """Pilot estimate of #H used as the planner's target when none is supplied."""
    m = stream_stats(events).directed_edges
    colors = max(pattern.t, _floor(m ** (1 / 3))) if m > 0 else pattern.t
    plan = manual_plan(pattern, colors, GroupSpec.roots(EXPLORATION_ROOTS), instances, m=m)
    report = run_ensemble(events, pattern, plan, derive_seed(master_seed, 1 << 32))
    target = max(1, round_half_up(report.mean))
    logger.warning(f"No target count given; exploratory run estimated {report.mean:.4g}, planning for {target}")
    return target
