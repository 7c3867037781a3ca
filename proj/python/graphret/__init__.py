"""Graph-aware retrieval over corpus graphs: vector search, graph-smoothed
reranking, frontier expansion and topology-aware evaluation metrics."""

from ._graphret import (
    CacheError,
    ConvergenceError,
    CorpusGraph,
    DimensionError,
    Engine,
    Error,
    HashEmbedder,
    HashReranker,
    LookupError,
    ModelError,
    ParseError,
    PathRule,
    ValidationError,
    VectorIndex,
    View,
    build_propagation,
    capped_recall_at_k,
    evaluate,
    frontier,
    fuse_latents,
    granker,
    hash_embed,
    marginal_recall_gain,
    miss_tr,
    ndcg_at_k,
    personalized_pagerank,
    recall_uncapped,
    rerank_plain,
    stex,
    synth_bridge,
    topological_recall,
    uncertainty,
    vector_search,
)

__all__ = [name for name in dir() if not name.startswith("_")]
