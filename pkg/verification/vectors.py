"""Vector primitives shared by every stage of the pipeline.

All arithmetic happens in float64, whatever precision the inputs were
stored in.
"""
from dataclasses import dataclass

import numpy as np

from .choices import Domain, Language
from .exceptions import (
    DegenerateAverage, DimensionMismatch, EmptySet, NormUnderflow,
)

NORM_EPS = 1e-12


@dataclass(frozen=True)
class Embedding:
    """One utterance embedding with its metadata."""
    utt_id: str
    speaker_id: str
    domain: Domain
    language: Language
    vec: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=np.float64)
        if vec.ndim != 1:
            raise DimensionMismatch(f'embedding {self.utt_id} is not a vector')
        if not np.all(np.isfinite(vec)):
            raise NormUnderflow(f'embedding {self.utt_id} has non-finite values')
        vec.setflags(write=False)
        object.__setattr__(self, 'vec', vec)
        object.__setattr__(self, 'domain', Domain(self.domain))
        object.__setattr__(self, 'language', Language(self.language))

    @property
    def dim(self):
        return self.vec.shape[0]


def as_vector(v):
    if isinstance(v, Embedding):
        return v.vec
    return np.asarray(v, dtype=np.float64)


def l2_normalize(v, eps=NORM_EPS):
    """Scale v to unit Euclidean norm."""
    v = as_vector(v)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm <= eps:
        raise NormUnderflow(f'vector norm {norm!r} is at or below {eps!r}')
    return v / norm


def normalize_rows(matrix, eps=NORM_EPS):
    """Row-wise l2_normalize of a 2-D array."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms <= eps):
        bad = int(np.argmin(norms))
        raise NormUnderflow(f'row {bad} has norm {norms[bad]!r} at or below {eps!r}')
    return matrix / norms[:, None]


def cosine(a, b, eps=NORM_EPS):
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f'cannot compare vectors of shape {a.shape} and {b.shape}')
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a <= eps or norm_b <= eps:
        raise NormUnderflow(f'vector norm at or below {eps!r}')
    return float(np.dot(a, b) / (norm_a * norm_b))


def average_embedding(members, eps=NORM_EPS):
    """Mean of the L2-normalized member vectors.

    The mean is returned as is (not re-normalized); cosine scoring
    downstream does not depend on its length.
    """
    if not members:
        raise EmptySet('cannot average an empty set of embeddings')
    vectors = [as_vector(m) for m in members]
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatch(f'members have mixed shapes {sorted(dims)}')
    # Sorting the rows makes the sum independent of member order.
    stacked = normalize_rows(np.vstack(vectors), eps=eps)
    order = np.lexsort(stacked.T[::-1])
    mean = stacked[order].sum(axis=0) / len(vectors)
    if np.linalg.norm(mean) <= eps:
        raise DegenerateAverage('member vectors cancel out')
    return mean
