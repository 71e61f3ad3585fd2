"""Local polynomial estimation for discontinuity and kink designs."""

from ._core import (  # noqa: F401
    BandwidthSide,
    ConfigError,
    Dataset,
    DerivedIndicators,
    DesignKind,
    DesignSpec,
    DgpSpec,
    DegenerateCurvatureError,
    Error,
    EstimateResult,
    FitSide,
    FitVar,
    FixedBandwidth,
    HouseholdRow,
    InferenceConfig,
    IngestReport,
    Interval,
    IoError,
    JumpComponents,
    KernelKind,
    McReport,
    Observation,
    ParameterError,
    PointEstimate,
    SampleSizeError,
    SchemaError,
    Sex,
    Side,
    SingularFitError,
    SummaryRow,
    SurveySchema,
    VarianceEstimate,
    VarianceEstimator,
    WeakFirstStageError,
    __version__,
    bandwidth_formula,
    binary_fuzzy_dgp,
    covariate_adjust,
    dataset_from_arrays,
    default_schema,
    derive_indicators,
    descriptive_table,
    estimate_bias,
    estimate_variance,
    fit_side,
    fnv1a64_hex,
    fuzzy_estimate,
    generate,
    kernel_weight,
    known_variables,
    load_survey,
    normal_cdf,
    normal_quantile,
    rbc_interval,
    read_dataset,
    run_design,
    run_monte_carlo,
    running_variable,
    select_bandwidth,
    sharp_estimate,
    standard_fuzzy_dgp,
    standard_sharp_dgp,
    star_label,
    validate_dataset,
    weighted_polyfit,
    write_dataset,
)
