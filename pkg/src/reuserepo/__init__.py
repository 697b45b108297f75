"""Reusable software asset repository with six retrieval methods."""

from .assets import AssetId, AssetKind, AssetRecord, Prefix, SemanticSignature, classify_asset, validate_record
from .engines import (
    DenotationalQ,
    DescriptiveQ,
    EngineConfig,
    InformationalQ,
    OperationalQ,
    RankedHit,
    Sample,
    StructuralQ,
    TopologicalQ,
    retrieve_and_instantiate,
    search,
)
from .pipeline import Found, NotFound, RegistrationStub, fuse_rankings, search_or_register
from .store import (
    Repository,
    Snapshot,
    add_asset,
    get_asset,
    list_assets,
    open_repository,
    rebuild_indexes,
    remove_asset,
)

__version__ = "0.1.0"
