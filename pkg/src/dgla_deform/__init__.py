"""Exact-arithmetic engine for deformations controlled by differential graded Lie algebras."""

from .artin import (ArtinAlgebra, NilpotentElement, bch, first_order_classes, gauge, gauge_equivalent, is_mc,
                    make_artin, mc_residual, primary_obstruction)
from .cech import CechScDGLA, build_cech_scdgla, cech_cohomology, cup_cochain
from .complexes import (ChainMap, CochainComplex, GradedMap, GradedVectorSpace, check_complex, cohomology, cone,
                        euler_characteristic, verify_exact)
from .dgla import (DGLA, DGLAMorphism, HtpyFiberElement, PolyFormElement, abelian_dgla, gl, htpy_fiber_check,
                   mapping_cone, matrix_dgla, poly_bracket, poly_d, poly_eval, validate_dgla, validate_morphism)
from .errors import *  # noqa: F401,F403
from .linalg import SparseMatrix, kernel_basis, rank, solve
from .pipelines import (Report, deform_morphism_report, defk_tangent, m_delta_check, pair_EU_report,
                        section_extension, smoothness_flags)
from .semicosimplicial import (ScDGLA, constant_scdgla, h1_total, h1sc_first_order, sc_from_pair, total_complex,
                               validate_scdgla, z1sc_check, z1sc_equiv)
from .sheaves import (CoherentSystem, CoverModel, SheafDGLA, SheafMorphism, SheafPresentation, direct_sum_sheaf,
                      end_dgla, end_sheaf, global_section, graph_subalgebra_L, hom_complex_QQ, hom_sheaf,
                      make_circle_cover, make_line_bundle, make_p1_cover, make_simplex_cover, trivial_sheaf)

__version__ = "0.1.0"
