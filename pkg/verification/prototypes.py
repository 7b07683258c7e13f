"""Speaker prototype store.

The columns of the AAM-softmax weight matrix W approximate the class
centres of the training speakers. The store snapshots W together with the
speaker metadata and derives the speaker-speaker similarity matrix used by
the batch planner, the language offset and the language backend.
"""
from dataclasses import dataclass

import numpy as np

from .choices import Domain, Language
from .exceptions import DataError, IndexOutOfRange, KTooLarge, NormUnderflow
from .vectors import NORM_EPS


@dataclass(frozen=True)
class SpeakerInfo:
    speaker_id: str
    domain: Domain
    language: Language


@dataclass(frozen=True)
class PrototypeMatrix:
    """D x N matrix of speaker prototypes (column j belongs to speakers[j])."""
    W: np.ndarray
    speakers: tuple

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64)
        if W.ndim != 2:
            raise DataError('prototype matrix must be two-dimensional')
        speakers = tuple(
            s if isinstance(s, SpeakerInfo) else SpeakerInfo(s[0], Domain(s[1]), Language(s[2]))
            for s in self.speakers
        )
        if W.shape[1] != len(speakers):
            raise DataError(f'{W.shape[1]} prototype columns but {len(speakers)} speakers')
        if len(speakers) < 2:
            raise DataError('a prototype matrix needs at least two speakers')
        ids = [s.speaker_id for s in speakers]
        if len(set(ids)) != len(ids):
            raise DataError('speaker ids in a prototype matrix must be unique')
        if not np.all(np.isfinite(W)):
            raise DataError('prototype matrix has non-finite entries')
        norms = np.linalg.norm(W, axis=0)
        if np.any(norms <= NORM_EPS):
            bad = int(np.argmin(norms))
            raise NormUnderflow(f'prototype of {ids[bad]} is degenerate')
        W.setflags(write=False)
        object.__setattr__(self, 'W', W)
        object.__setattr__(self, 'speakers', speakers)

    @property
    def D(self):
        return self.W.shape[0]

    @property
    def N(self):
        return self.W.shape[1]

    @property
    def speaker_ids(self):
        return [s.speaker_id for s in self.speakers]

    def index_of(self, speaker_id):
        for index, info in enumerate(self.speakers):
            if info.speaker_id == speaker_id:
                return index
        raise IndexOutOfRange(f'unknown speaker {speaker_id}')

    def normalized_columns(self):
        return self.W / np.linalg.norm(self.W, axis=0)

    def indices_where(self, domain=None, language=None):
        return [
            j for j, info in enumerate(self.speakers)
            if (domain is None or info.domain == domain)
            and (language is None or info.language == language)
        ]


@dataclass(frozen=True)
class SimilarityMatrix:
    S: np.ndarray
    epoch_tag: int = 0

    @property
    def N(self):
        return self.S.shape[0]


def similarity_matrix(p, epoch_tag=0, dtype=np.float64):
    """Cosine similarity between all pairs of prototypes (W^T W on unit columns)."""
    Wn = p.normalized_columns()
    S = Wn.T @ Wn
    S = np.clip((S + S.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(S, 1.0)
    S = S.astype(dtype)
    S.setflags(write=False)
    return SimilarityMatrix(S=S, epoch_tag=epoch_tag)


def top_similar(s, speaker_index, k, candidates=None):
    """The k speakers most similar to speaker_index, the speaker itself first.

    Ties are broken by ascending speaker index. `candidates` restricts the
    search to a subset of speaker indices (the speaker itself is always
    included).
    """
    n = s.N
    if not 0 <= speaker_index < n:
        raise IndexOutOfRange(f'speaker index {speaker_index} outside [0, {n})')
    pool = np.arange(n) if candidates is None else np.unique(np.asarray(candidates, dtype=np.int64))
    pool = pool[pool != speaker_index]
    if k < 1 or k > len(pool) + 1:
        raise KTooLarge(f'cannot pick {k} similar speakers out of {len(pool) + 1}')
    row = np.asarray(s.S[speaker_index], dtype=np.float64)[pool]
    order = np.lexsort((pool, -row))
    return [int(speaker_index)] + [int(j) for j in pool[order[:k - 1]]]
