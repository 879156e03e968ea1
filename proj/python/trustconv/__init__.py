"""Nondirective trust-prompt generation and conversational survey engine."""

import json

from ._trustconv import (
    DialogSession,
    SessionStore,
    TrustconvError,
    agglomerate,
    classify_intent,
    cosine_similarity,
    cut_tree,
    default_prompt_set_json,
    glove_weight,
    porter_stem,
    preprocess_text,
    run_pipeline,
    smoothed_log_odds,
    tokenize,
)


def default_prompt_set():
    return json.loads(default_prompt_set_json())


__all__ = [
    "DialogSession",
    "SessionStore",
    "TrustconvError",
    "agglomerate",
    "classify_intent",
    "cosine_similarity",
    "cut_tree",
    "default_prompt_set",
    "default_prompt_set_json",
    "glove_weight",
    "porter_stem",
    "preprocess_text",
    "run_pipeline",
    "smoothed_log_odds",
    "tokenize",
]
