"""Extended persistent homology features for vertex-filtered graphs.

The pipeline: graphs in, vertex filtration functions, extended
persistence diagrams, landscape or image summaries, and on top of those
diagram metrics, a stability check, and contrastive training utilities.
"""

from ._backend import USING_NUMBA
from .contrastive import (
    EmbeddingBatch,
    EtlMlp,
    LossConfig,
    TrainResult,
    combined_loss,
    encode_graph_baseline,
    etl_forward,
    etl_init,
    grad_check,
    ntxent_loss,
    train_joint,
    train_topo,
)
from .errors import (
    AugmentError,
    ExtopoError,
    FiltrationError,
    IngestError,
    LossError,
    MetricError,
    NoiseError,
    PersistenceError,
    VectorizeError,
)
from .evaluate import ClassifyReport, classify_features, softmax_regression, stratified_folds
from .filtration import (
    CENTRALITY_NAMES,
    FiltrationBundle,
    VertexFunction,
    betweenness_centrality,
    closeness_centrality,
    degree_centrality,
    make_bundle,
    subgraph_centrality,
)
from .graphs import (
    AugmentationSpec,
    Graph,
    GraphDataset,
    augment,
    inject_feature_noise,
    parse_tudataset,
    random_connected_graph,
    random_graph,
    write_tudataset,
)
from .metrics import (
    MatchingResult,
    bottleneck,
    bottleneck_matching,
    diagram_landscape_inf,
    landscape_distance,
    stability_trial,
    wasserstein,
    wasserstein_matching,
)
from .persistence import (
    EPDPoint,
    ExtendedPersistenceDiagram,
    epd_bundle,
    epd_fast,
    epd_reduction_oracle,
    load_diagram,
    save_diagram,
)
from .plotting import diagram_svg, landscape_svg
from .vectorization import (
    FeatureConfig,
    FeatureVector,
    LandscapeSet,
    PersistenceImage,
    default_sigma,
    featurize,
    featurize_diagrams,
    fit_feature_config,
    landscape,
    landscape_grid,
    load_landscape,
    persistence_image,
    read_feature_csv,
    save_landscape,
    tent_value,
    write_feature_csv,
)

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "__version__",
    # errors
    "ExtopoError",
    "IngestError",
    "AugmentError",
    "NoiseError",
    "FiltrationError",
    "PersistenceError",
    "VectorizeError",
    "MetricError",
    "LossError",
    # graphs
    "Graph",
    "GraphDataset",
    "AugmentationSpec",
    "augment",
    "inject_feature_noise",
    "parse_tudataset",
    "write_tudataset",
    "random_graph",
    "random_connected_graph",
    # filtration
    "CENTRALITY_NAMES",
    "VertexFunction",
    "FiltrationBundle",
    "degree_centrality",
    "betweenness_centrality",
    "closeness_centrality",
    "subgraph_centrality",
    "make_bundle",
    # persistence
    "EPDPoint",
    "ExtendedPersistenceDiagram",
    "epd_fast",
    "epd_reduction_oracle",
    "epd_bundle",
    "save_diagram",
    "load_diagram",
    # vectorization
    "LandscapeSet",
    "PersistenceImage",
    "FeatureVector",
    "FeatureConfig",
    "tent_value",
    "landscape_grid",
    "landscape",
    "default_sigma",
    "persistence_image",
    "fit_feature_config",
    "featurize_diagrams",
    "featurize",
    "write_feature_csv",
    "read_feature_csv",
    "save_landscape",
    "load_landscape",
    # metrics
    "MatchingResult",
    "landscape_distance",
    "bottleneck",
    "bottleneck_matching",
    "wasserstein",
    "wasserstein_matching",
    "diagram_landscape_inf",
    "stability_trial",
    # contrastive
    "EmbeddingBatch",
    "LossConfig",
    "EtlMlp",
    "TrainResult",
    "ntxent_loss",
    "combined_loss",
    "etl_init",
    "etl_forward",
    "grad_check",
    "train_topo",
    "train_joint",
    "encode_graph_baseline",
    # evaluation and plots
    "ClassifyReport",
    "stratified_folds",
    "softmax_regression",
    "classify_features",
    "diagram_svg",
    "landscape_svg",
]
