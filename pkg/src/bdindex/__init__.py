"""Exact biharmonic-distance queries through a hierarchical label index."""

from .graph import Graph, load_edge_list, write_edge_list
from .hierarchy import (
    HierarchyTree,
    build_hierarchy,
    build_min_degree_hierarchy,
    build_separator_hierarchy,
    hierarchy_stats,
    validate_hierarchy,
)
from .index import BDIndex, build_index
from .query import batch_query, edge_centrality, query_bd, sample_pairs
from .storage import deserialize, serialize

__all__ = [
    "BDIndex",
    "Graph",
    "HierarchyTree",
    "batch_query",
    "build_hierarchy",
    "build_index",
    "build_min_degree_hierarchy",
    "build_separator_hierarchy",
    "deserialize",
    "edge_centrality",
    "hierarchy_stats",
    "load_edge_list",
    "query_bd",
    "sample_pairs",
    "serialize",
    "validate_hierarchy",
    "write_edge_list",
]
