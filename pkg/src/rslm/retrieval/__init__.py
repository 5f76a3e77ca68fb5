from .index import (
    EmbeddingIndex,
    RetrievalResult,
    build_index,
    cosine,
    load_index,
    query_text,
    save_index,
    topk_precision,
)

__all__ = [
    "EmbeddingIndex",
    "RetrievalResult",
    "build_index",
    "cosine",
    "load_index",
    "query_text",
    "save_index",
    "topk_precision",
]
