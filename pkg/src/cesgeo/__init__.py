"""Fisher-Rao geometry of complex elliptical distributions on the HPD cone."""

from .errors import (
    CesGeoError,
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    EmptyClass,
    FileFormatError,
    InsufficientSamples,
    InvalidMetricParams,
    LeftCone,
    NoConvergence,
    NotHermitian,
    NotPositiveDefinite,
    NumericalRankLoss,
    SingularFim,
)
from .geometry import (
    GAUSSIAN_PARAMS,
    MetricParams,
    euclidean_distance_sq,
    euclidean_inner,
    fisher_rao_distance_sq,
    geodesic_between,
    geodesic_from_direction,
    metric_inner,
    retract_first_order,
    retract_second_order,
    riemannian_exp,
    riemannian_log,
)
from .linalg import check_hermitian, eig_hermitian, spectral_map, toeplitz_scatter, validate_hpd
from .models import (
    CesCoefficients,
    CesModel,
    SampleBatch,
    coefficients,
    gaussian,
    neg_log_likelihood,
    sample_batch,
    stream_rng,
    student_t,
)
from .estimation import (
    EstimationConfig,
    EstimationResult,
    mle_fixed_point,
    riemannian_grad_nll,
    riemannian_gradient_descent,
    scm,
)
from .icrb import (
    BoundReport,
    EstimatorSpec,
    McScenario,
    TangentBasis,
    crb_euclidean,
    crb_fisher_rao,
    crb_natural,
    error_vector,
    euclidean_basis,
    fim_matrix,
    gram_schmidt_basis,
    mc_mse_experiment,
    natural_basis,
)
from .classify import (
    ClassCenters,
    KarcherResult,
    LabeledCovSet,
    MixtureScenario,
    evaluate_accuracy,
    karcher_mean,
    karcher_variance,
    mdm_predict,
    mdm_train,
    synthetic_mixture,
)

__version__ = "0.1.0"
