"""Frame decomposition of the atmospheric tomography operator.

Forward model, frame and dual-frame machinery, closed-form block SVD and
minimum-coefficient reconstruction of turbulence layers from wavefronts.
"""
from .geometry import (Aperture, AtmosphereConfig, GuideStar, ScalingTable, TorusDomain,
                       choose_torus_halfwidth, layer_domain_masks, scaling_factor, scaling_table)
from .fields import (FrequencyBand, GridField, LayerSet, WavefrontSet, analysis_aperture,
                     eval_w_jk, eval_w_jk_lg, inner_product, synthesis_aperture)
from .frame import (DualFrameCache, FiniteFrame, LayerFrame, dual_error_bound, dual_frame_iterate,
                    dual_reconstruct, frame_apply_S, frame_bounds_estimate)
from .operator import (BlockMatrix, ExplicitSvd, block_pseudoinverse, build_block_matrix,
                       explicit_svd, forward, residual_identity, wavefront_coefficient)
from .lgs_periodic import PeriodicBlock, periodic_block, periodic_forward, periodic_pseudoinverse, picard_diagnostic
from .recon import (ReconstructionReport, coefficient_solution_equals_pinv, consistency_defect,
                    operator_norm_bound, reconstruct)

__version__ = "0.1.0"
