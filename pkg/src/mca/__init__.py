"""Non-uniform cellular automata over monoid actions, with a modal model checker."""

from .automaton import (
    CellularAutomaton,
    evolve,
    global_step,
    is_orbit_invariant,
    local_configs,
    local_view,
    evaluation_map,
    orbit_relation,
    reachable_set,
    restrict_to,
    validate,
)
from .common import Exhaustive, MCAError, Sample, Verdict
from .logic import ModelChecker, check, lasso, parse_formula, valid
from .monoid import MonoidPresentation, Word, free_monoid, parse_word

__version__ = "0.1.0"
