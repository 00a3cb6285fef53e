"""Grüss-type inequalities for semi-inner product modules over matrix algebras.

Numerical evaluation of the Grüss functional, certified bounds with
sharpness witnesses, discrete Fourier and Mellin transform estimates, and a
reproducible randomized verification harness.
"""

from .certificate import BoundCertificate, TransformCertificate
from .core import (
    check_gruss_radius,
    check_trace_gruss_spread,
    check_algebra_gruss,
    check_weighted_mean,
    check_gruss_schwarz,
    check_classical_gruss,
    check_classical_weighted_mean,
    check_gruss_mean_square,
    check_trace_gruss,
    check_trace_gruss_refined,
    gruss,
    gruss_double_sum,
    sharpness_witness_c,
)
from .errors import *  # noqa: F401,F403
from .harness import SuiteConfig, SuiteReport, run_suite, tightness_scan
from .instance import ModuleInstance, load_instance, random_instance, save_instance
from .kernel import hermitian_eig, operator_norm, positive_sqrt, spectral_radius, trace_norm
from .module import hs_seminorm, inner_product, module_norm
from .report import emit_report
from .transforms import fourier, geometric_phase_sum, mellin, power_sum

__version__ = "0.1.0"
