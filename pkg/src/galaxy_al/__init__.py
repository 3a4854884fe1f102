"""Graph-based batch active learning for extremely class-imbalanced pools."""

from .builder import (
    build_graphs,
    compute_confidences,
    compute_margins,
    connect,
    validate_score_matrix,
)
from .core import (
    ContractViolationError,
    FormatError,
    GalaxyError,
    InputError,
    LabeledSet,
    OrderExhaustedError,
    PoolExhaustedError,
    ProtocolError,
)
from .engine import (
    Batch,
    BatchSelection,
    ExternalScoreProvider,
    MetricsRow,
    StaticScoreProvider,
    galaxy_run,
    galaxy_select_batch,
    s2_select,
)
from .graphs import (
    GraphSet,
    Path,
    neighbors,
    path_midpoint,
    remove_cut_edges,
    shortest_straddling_path,
)
from .strategies import (
    confidence_sampling_batch,
    most_likely_positive_batch,
    random_batch,
)

__all__ = [
    "Batch",
    "BatchSelection",
    "ContractViolationError",
    "ExternalScoreProvider",
    "FormatError",
    "GalaxyError",
    "GraphSet",
    "InputError",
    "LabeledSet",
    "MetricsRow",
    "OrderExhaustedError",
    "Path",
    "PoolExhaustedError",
    "ProtocolError",
    "StaticScoreProvider",
    "build_graphs",
    "compute_confidences",
    "compute_margins",
    "confidence_sampling_batch",
    "connect",
    "galaxy_run",
    "galaxy_select_batch",
    "most_likely_positive_batch",
    "neighbors",
    "path_midpoint",
    "random_batch",
    "remove_cut_edges",
    "s2_select",
    "shortest_straddling_path",
    "validate_score_matrix",
]

__version__ = "0.1.0"
