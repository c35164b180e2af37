"""Retrieval-augmented generation engine for collections of long videos.

Pipeline: ground videos into per-clip captions and transcripts, build a
cross-video knowledge graph plus chunk/clip embedding stores, retrieve through
dual channels (graph-mediated textual matching and cross-modal visual search),
filter candidates with an LLM judge, and generate answers over the assembled
evidence.  An LLM-judge evaluation harness covers pairwise win-rate and
baseline-scored protocols.
"""

from .config import EngineConfig, load_config
from .engine import (
    LibraryManifest,
    QueryEngine,
    QueryResult,
    build_index,
    build_suite_from_config,
    load_manifest,
)
from .retrieval import Query
from .storage import IndexBundle, load_index, save_index

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "IndexBundle",
    "LibraryManifest",
    "Query",
    "QueryEngine",
    "QueryResult",
    "build_index",
    "build_suite_from_config",
    "load_config",
    "load_index",
    "load_manifest",
    "save_index",
    "__version__",
]
