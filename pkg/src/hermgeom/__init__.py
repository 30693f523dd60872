"""Pointwise tensor calculator and identity verifier for Hermitian manifolds.

Metrics are given in a local holomorphic chart, either as zoo entries with
closed-form jets or as DSL expressions in ``z`` and ``conj(z)``.  All geometry
is computed from second-order Wirtinger jets of the metric; index layouts are
described in ``docs/conventions.md``.
"""

from .connections import (ChristoffelSet, TorsionSet, adjoint_torsion_forms, christoffels,
                          gamma_torsion_relation_residual, torsion)
from .curvature import (CurvatureBundle, DetConnectionForms, chern_curvature, chern_ricci,
                        conformal_residual, conformal_transform, curvature_bundle, det_connection,
                        lc_curvature_11, lc_ricci1)
from .dsl import load_metric, parse_expr, parse_metric, render
from .errors import (DimensionError, DomainError, HermGeomError, HypothesisError, IntegrationError,
                     MetricError, ParseError)
from .identities import (WHEReport, curvature_relation_residual, ddbar_omega_residual, equation_S_residual,
                         identity_suite, lambda_ddbar_omega, nabla_theta_symmetric_part, q_tensor,
                         surface_gamma_torsion_residual, surface_q_identity_residual, whe_check)
from .jets import Jet, MetricField, MetricJet2, WirtingerJet, eval_jet, fd_jet
from .quadrature import (Box, HopfAnnulus, IntegralEstimate, TorusCell, chern_weil_check,
                         integrate_top_form, intersection_number_c1, l2_identity_check)
from .tensors import (Form01, Form10, Form11, IdentityReport, Tensor4, form_norm_sq, hermitian_inverse,
                      hodge_star_11_surface, trace_lambda)
from .zoo import ZooEntry, flat_torus, fubini_study, hopf, periodic_torus, random_metric

__version__ = "0.1.0"
