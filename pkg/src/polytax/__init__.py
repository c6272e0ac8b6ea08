"""polytax: economic-policy taxonomy engine and trait analytics."""

from .model import (
    AtomicPolicy,
    AtomicPolicySchema,
    CheckTable,
    Diagnostic,
    ParameterSpec,
    PolicyCategory,
    PolicyError,
    SubtraitDef,
    TableRow,
    TaxonomyModel,
    TaxonomyNode,
    TraitDef,
    TransactionChannel,
    instantiate_atomic_policy,
    validate_model,
)
from .ingest import (
    IngestError,
    load_bundled_dataset,
    merge_extension,
    parse_taxonomy_document,
    serialize_taxonomy_document,
)
from .enumeration import (
    EnumerationFilter,
    build_tree,
    count_checkmarks,
    enumerate_schemas,
    lookup,
)
from .analytics import (
    build_trait_matrix,
    euclidean_distance,
    kruskal_mst,
    pearson_correlation,
    signal_series,
)

__version__ = "0.1.0"
