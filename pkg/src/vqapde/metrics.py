"""Error measures between reference and variational solutions."""
from __future__ import annotations

import numpy as np


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a, dtype=float).ravel(), np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def l2_error(y_ref, y_vqa) -> float:
    """Unnormalised Euclidean distance sqrt(sum (y_ref - y_vqa)^2)."""
    a, b = _pair(y_ref, y_vqa)
    return float(np.sqrt(np.sum((a - b) ** 2)))


def trace_distance(y_ref, y_vqa) -> float:
    """sqrt(1 - sum_k |a_k b_k|^2) with a, b the unit-normalised vectors.

    This pointwise-product form is kept as published; it is not the
    standard quantum trace distance.
    """
    a, b = _pair(y_ref, y_vqa)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("trace distance undefined for a zero vector")
    s = np.sum(np.abs(a / na * b / nb) ** 2)
    return float(np.sqrt(max(1.0 - s, 0.0)))


def trace_distance_overlap(y_ref, y_vqa) -> float:
    """sqrt(1 - |<a|b>|^2) for the unit-normalised vectors (pure-state trace distance).

    Reported next to :func:`trace_distance`; this is the form whose values
    vanish for converged runs.
    """
    a, b = _pair(y_ref, y_vqa)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("trace distance undefined for a zero vector")
    s = float(np.dot(a / na, b / nb)) ** 2
    return float(np.sqrt(max(1.0 - s, 0.0)))


def time_average(series) -> float:
    s = np.asarray(series, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("empty series")
    return float(np.mean(s))
