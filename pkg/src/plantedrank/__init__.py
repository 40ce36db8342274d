"""Planted submatrices and permuted isotonic matrices: detection, support
estimation, peeling, ranking and low-degree bounds."""

__version__ = "0.1.0"

from .detect import (DetectDecision, ScanBudgetError, detect_aggregate, detect_dyadic, mc_detection_risk,
                     separation_sweep, stat_global_sum, stat_line_scan, stat_submatrix_scan)
from .model import (BlockSpec, InvalidInputError, InvalidOracleError, InvalidParameterError, InvalidSpecError,
                    LossReport, apply_row_permutation, gen_hard_instance, gen_isotonic, is_isotonic,
                    is_permuted_isotonic, make_block_matrix, random_block, ranking_loss, reconstruction_loss,
                    sample_observations)
from .montecarlo import RiskEstimate
from .peel import PeelResult, dyadic_block, level_select, peel
from .rank import RankMethod, evaluate_pipeline, project_isotonic, rank_row_sums, rank_spectral, reconstruct
from .rng import RngSeed, derive_seed
from .support import (SupportDecision, est_combined, est_row_sum, est_scan_two_stage, est_two_stage,
                      rank_block)

__all__ = [
    "BlockSpec", "DetectDecision", "InvalidInputError", "InvalidOracleError", "InvalidParameterError",
    "InvalidSpecError", "LossReport", "PeelResult", "RankMethod", "RiskEstimate", "RngSeed",
    "ScanBudgetError", "SupportDecision", "apply_row_permutation", "derive_seed", "detect_aggregate",
    "detect_dyadic", "dyadic_block", "est_combined", "est_row_sum", "est_scan_two_stage", "est_two_stage",
    "evaluate_pipeline", "gen_hard_instance", "gen_isotonic", "is_isotonic", "is_permuted_isotonic",
    "level_select", "make_block_matrix", "mc_detection_risk", "peel", "project_isotonic", "random_block",
    "rank_block", "rank_row_sums", "rank_spectral", "ranking_loss", "reconstruct", "reconstruction_loss",
    "sample_observations", "separation_sweep", "stat_global_sum", "stat_line_scan", "stat_submatrix_scan",
]
