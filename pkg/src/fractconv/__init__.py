"""Fractal convolution of real functions on an interval.

``f *_T b`` is the fixed point of a Read-Bajraktarevic operator built from a
seed f, a base b, scale functions alpha_n and a partition of the interval.
"""

from .bases import (
    FrameReport,
    FunctionFamily,
    convolve_family,
    frame_perturbation_bounds,
    gram_matrix,
    lambda_schedule,
    perturbation_R,
    riesz_bounds,
    spectral_envelope,
    spectrum_report,
    symmetric_eigenvalues,
    trig_basis,
    union_family,
)
from .engine import (
    ConvolutionConfig,
    IterationLog,
    apply_rb_operator,
    convolve,
    fixed_point,
    iterate_left_null,
    iterate_left_null_at,
    left_null,
    make_config,
    node_values,
    pushforward_at,
    pushforward_eval,
    right_null,
    self_referential_residual,
)
from .errors import (
    AddressCapExceeded,
    ContractivityError,
    FractConvError,
    InvalidArgument,
    OutOfDomain,
    ShapeMismatch,
    SingularNodeSystem,
)
from .expr import DomainError, ExprSyntaxError, evaluate, parse, sample
from .functions import (
    GridFunction,
    ScaleVector,
    compute_lambda,
    constant_scale,
    gf_add,
    gf_scale,
    gf_sub,
    make_scale_vector,
    sample_function,
    zero_function,
)
from .metrics import NormSpec, dp_metric, distance, hausdorff, inner_product, lp_norm, set_delta, size
from .partition import (
    AffineMapFamily,
    Partition,
    address_grid,
    locate_subinterval,
    make_affine_maps,
    make_uniform_partition,
    map_forward,
    map_inverse,
)

__version__ = "0.1.0"
