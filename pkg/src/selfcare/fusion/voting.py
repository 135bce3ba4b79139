"""Hard and soft late-fusion voting over branch probability vectors."""

from __future__ import annotations

import numpy as np

from ..errors import DataError


def _stack(probabilities) -> np.ndarray:
    if len(probabilities) == 0:
        raise DataError("no branch predictions to fuse")
    matrix = np.vstack([np.asarray(p, dtype=np.float64).ravel() for p in probabilities])
    if not np.all(np.isfinite(matrix)):
        raise DataError("non-finite branch probabilities")
    return matrix


def hard_vote(probabilities) -> int:
    """Most common per-branch argmax.

    Vote ties go to the class with the larger summed probability, then to
    the lower class index.
    """
    matrix = _stack(probabilities)
    votes = np.argmax(matrix, axis=1)
    counts = np.bincount(votes, minlength=matrix.shape[1])
    tied = np.flatnonzero(counts == counts.max())
    if tied.size == 1:
        return int(tied[0])
    sums = matrix.sum(axis=0)[tied]
    return int(tied[np.argmax(sums)])


def soft_vote(probabilities) -> int:
    """Argmax of the elementwise mean probability."""
    matrix = _stack(probabilities)
    return int(np.argmax(matrix.mean(axis=0)))
