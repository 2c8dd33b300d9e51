"""Semantics-aware spatial keyword search.

Pipeline: spatial range filter -> embedding top-k shortlist -> language-model
re-ranking, with TF-IDF / LDA baselines and an F1@k benchmark harness.
"""

__version__ = "0.1.0"
