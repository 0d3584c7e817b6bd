"""Truth and determinateness over finite sentence universes.

The stage iteration runs to a fixpoint over a universe built from seed
declarations; the checkers then test the result against the axiom schemes.
Satisfaction classes over formula/assignment pairs live in ``similarity``.
"""

from .arith import collapse, term_variants, value_assign, value_closed
from .checker import (check_all, check_cd_axioms, check_compat, check_ct_minus,
                      check_fixpoint, check_monotonicity, check_partial_comp)
from .engine import (Pipeline, Stage, StageTrace, d_operator, limit_sets, run_pipeline,
                     run_stages, stage_truth, t_final, tarski_eval)
from .report import AxiomReport
from .similarity import (SatEntry, canonical_pair, check_det_comp, check_gamma, entry,
                         ev_chain, ev_extend, pipeline_pair, rank_order, similar,
                         similar_oracle)
from .syntax import (SentenceTable, SyntaxErr, parse_formula, parse_source, show,
                     translate_circ, translate_star)
from .universe import Caps, Universe, build_universe

__all__ = [
    "AxiomReport", "Caps", "Pipeline", "SatEntry", "SentenceTable", "Stage", "StageTrace",
    "SyntaxErr", "Universe", "build_universe", "canonical_pair", "check_all",
    "check_cd_axioms", "check_compat", "check_ct_minus", "check_det_comp", "check_fixpoint",
    "check_gamma", "check_monotonicity", "check_partial_comp", "collapse", "d_operator",
    "entry", "ev_chain", "ev_extend", "limit_sets", "parse_formula", "parse_source",
    "pipeline_pair", "rank_order", "run_pipeline", "run_stages", "show", "similar",
    "similar_oracle", "stage_truth", "t_final", "tarski_eval", "term_variants",
    "translate_circ", "translate_star", "value_assign", "value_closed",
]
