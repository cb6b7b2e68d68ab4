"""Cross-modal retrieval of abnormal findings for two-view chest X-ray studies."""

from ._cvse import (
    Model,
    bleu,
    cluster,
    evaluate,
    export_attention,
    gen_synthetic,
    label_diseases,
    meteor,
    mutex_pattern,
    read_feature_map,
    recall_at_k,
    retrieve,
    rouge_l,
    split_sentences,
    tokenize,
    train,
    write_feature_map,
)

__all__ = [
    "Model",
    "bleu",
    "cluster",
    "evaluate",
    "export_attention",
    "gen_synthetic",
    "label_diseases",
    "meteor",
    "mutex_pattern",
    "read_feature_map",
    "recall_at_k",
    "retrieve",
    "rouge_l",
    "split_sentences",
    "tokenize",
    "train",
    "write_feature_map",
]
