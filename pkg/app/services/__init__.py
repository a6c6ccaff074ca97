from .algebra import GroupElement, GroupKind, GroupSpec
from .errors import MotifSketchError
from .estimator import Ensemble, PlanInput, plan_parameters, run_ensemble
from .oracle import MaterializedGraph, exact_count, replay
from .pattern import Pattern, load_pattern, parse_pattern
from .sketch import Algorithm, SketchConfig, SketchState, merge
from .streamio import EdgeEvent, generate, parse_stream

__all__ = ['Algorithm', 'EdgeEvent', 'Ensemble', 'GroupElement', 'GroupKind', 'GroupSpec', 'MaterializedGraph',
           'MotifSketchError', 'Pattern', 'PlanInput', 'SketchConfig', 'SketchState', 'exact_count', 'generate',
           'load_pattern', 'merge', 'parse_pattern', 'parse_stream', 'plan_parameters', 'replay', 'run_ensemble']
