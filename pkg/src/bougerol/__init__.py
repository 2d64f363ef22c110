"""Monte-Carlo verification engine for identities in law of the exponential
functional of Brownian motion, its Bessel clock, and planar winding.

The package simulates each identity at desk scale and decides it by
statistical tests against exact samplers or closed-form targets.
"""

from bougerol.special_functions import (
    JointLaplaceMellinParams,
    MellinParams,
    arg_sinh,
    bougerol_kernel_rhs,
    hyp2f1,
    joint_density_abs_bm_local_time,
    joint_laplace_mellin_closed_form,
    kolmogorov_cdf,
    log_gamma,
    mellin_exp_functional,
)
from bougerol.verifications import (
    REGISTRY,
    TestReport,
    get_registered,
    registry_names,
    run_registered,
)

__version__ = "0.1.0"
