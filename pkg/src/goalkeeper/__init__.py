"""Toolkit for three-choice sequence prediction games driven by context tree
sources: simulation, penalized context tree selection, independence testing,
sliding-window strategy analysis, group statistics, and a live game service.
"""

from . import agents, bic, ctm, groupstats, lrtest, rng, session, special, windows
from .bic import PairedSample, bic_select, count_statistics, tune_penalty
from .ctm import (
    ContextTree,
    ContextTreeModel,
    PartialTemplate,
    StationarySummary,
    build_model,
    context_lookup,
    preset_model,
    simulate,
    stationary_summary,
)
from .lrtest import chi_square_survival, lr_statistic, lr_test
from .windows import (
    StrategyDensities,
    WindowSpec,
    build_strategy_densities,
    classify_strategy,
    cpcp_curve,
    mode_context_tree,
    normalized_logit,
    pcp,
)

__version__ = "0.1.0"
