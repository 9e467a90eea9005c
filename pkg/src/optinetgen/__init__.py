"""optinetgen: synthetic optical-network topology generation.

Generates survivable backbone meshes, metro-core meshes and ring
structures, and metro-aggregation horseshoes from statistical targets,
validates the results, and persists everything as workbooks.
"""

from .errors import (
    DanglingReferenceError,
    DisjointHistogramsError,
    DuplicateLinkError,
    EmptyTopologyError,
    GenerationError,
    InvalidLengthError,
    InvalidParamsError,
    MissingTableError,
    SelfLoopError,
    TopologyError,
    UnknownLinkError,
    UnknownNodeError,
    VersionMismatchError,
    WorkbookError,
)
from .model import (
    DEFAULT_COLORS,
    EditResult,
    Link,
    Node,
    NodeType,
    SEGMENT_BACKBONE,
    SEGMENT_METRO_AGG,
    SEGMENT_METRO_MESH,
    SEGMENT_METRO_RING,
    SurvivabilityReport,
    Topology,
    add_link,
    degree_histogram,
    drop_link,
    survivability_check,
)
from .layout import (
    LAYOUT_KAMADA_KAWAI,
    LAYOUT_SPECTRAL,
    LAYOUT_SPRING,
    compute_layout,
    scale_to_ranges,
)
from .validation import (
    CampaignResult,
    DEFAULT_BACKBONE_DEGREES,
    DEFAULT_BACKBONE_RANGES,
    DEFAULT_METRO_RANGES,
    DegreeDistribution,
    DistanceRanges,
    ValidationReport,
    best_of_n,
    compare_histograms,
    mape,
    range_histogram,
    validate_topology,
)
from .backbone import (
    ALL_NATIONAL,
    BackboneParams,
    NodeTypeMix,
    STRATEGY_DEFAULT,
    STRATEGY_REGION,
    STRATEGY_TWIN,
    TWIN_SUFFIX,
    WaxmanRegionParams,
    configuration_model,
    ensure_two_edge_connected,
    generate_backbone,
    generate_mesh_backbone,
    generate_region_backbone,
    generate_twin_backbone,
)
from .clustering import (
    ClusterAssignment,
    ClusterParams,
    MODE_DISTANCE,
    MODE_DISTANCE_CONNECTIVITY,
    apply_clusters,
    cluster_nodes,
)
from .metro_core import (
    ALLOWED_RING_COUNTS,
    DEFAULT_RING_OCCURRENCE,
    MetroMeshParams,
    RingConfig,
    RingStructureSpec,
    generate_metro_mesh,
    generate_nring,
    load_ring_defaults,
    ring_configs_from_defaults,
    sample_nring_count,
)
from .metro_agg import (
    DEFAULT_LEN_RANGES,
    DEFAULT_NODE_COUNT_OCCURRENCE,
    DEFAULT_PERC_LENGTH,
    HorseshoeSpec,
    HorseshoeStats,
    generate_horseshoe,
    horseshoe_stats,
    sample_hops,
)
from .workbook import (
    Workbook,
    export_svg,
    load_workbook,
    save_workbook,
)
from .flow import FlowConfig, FlowResult, run_flow

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
