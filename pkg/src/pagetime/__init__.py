"""Predict end-user web page response time from page composition and network profiles."""

__version__ = "0.1.0"

from .browser import RenderClass, Rounding, bpe, classify_parallel, render_class, render_time
from .exceptions import (
    DegenerateFit,
    DomainError,
    EmptyColumn,
    EmptyManifest,
    IncompleteManifest,
    PagetimeError,
    ParseError,
    ProfileIncomplete,
    SchemaError,
    ValidationError,
)
from .fitting import (
    AffineSizeRegressor,
    FitResult,
    LogSizeRegressor,
    MeasurementRecord,
    NetworkProfileEstimator,
    RecordKind,
    ValidationStats,
    build_profile,
    derive_first_byte,
    fit_affine,
    fit_log,
    mean_of,
    validate,
)
from .manifest import (
    ComponentClass,
    HttpComponent,
    PageAggregates,
    PageManifest,
    aggregates,
    parse_har,
    parse_worksheet_csv,
)
from .predictor import (
    DnsConnectMode,
    PredictionBreakdown,
    PredictionConfig,
    ResponseTimePredictor,
    compare,
    predict_from_sizes,
    predict_worksheet,
)
from .profile import AffineModel, ConstantModel, LogModel, NetworkProfile, eval_model, load_profile, save_profile
from .transform import ManifestFeatures
from .waterfall import SimComponent, SimResult, effective_parallelism, simulate, sweep
