"""Learned sparse ternary hashing for similarity search."""

from ._ternhash import (
    ArgumentError,
    DataError,
    DimensionError,
    EncoderParams,
    Index,
    LinearHashParams,
    NumericError,
    Strategy,
    code_stats,
    diffhash_fit,
    evaluate,
    hamming_distance,
    init_params,
    load_encoder,
    load_index,
    make_clusters,
    make_pairs,
    nnhash_train,
    pair_loss,
    probe_cost,
    quantize,
    save_encoder,
    sparsity,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "DataError",
    "DimensionError",
    "EncoderParams",
    "Index",
    "LinearHashParams",
    "NumericError",
    "Strategy",
    "code_stats",
    "diffhash_fit",
    "evaluate",
    "hamming_distance",
    "init_params",
    "load_encoder",
    "load_index",
    "make_clusters",
    "make_pairs",
    "nnhash_train",
    "pair_loss",
    "probe_cost",
    "quantize",
    "save_encoder",
    "sparsity",
    "train",
]
