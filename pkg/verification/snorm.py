"""Trial scoring with top-N adaptive s-norm and its language-dependent variant.

The normalized score of a trial (e, t) with raw cosine s is

    (s - mu_t) / sigma_t + (s - (mu_e - alpha)) / sigma_e

where mu/sigma are the mean and population standard deviation of the N
highest cohort scores of each side. alpha is non-zero only when the test
utterance was detected as English.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .choices import Language, ScoringMode
from .exceptions import (
    ClassTooSmall, DegenerateCohort, EmptySet, MissingEmbedding,
    MissingLidDecision, ParamInvalid,
)
from .metrics import ScoreSet
from .vectors import average_embedding, cosine, l2_normalize, normalize_rows

logger = logging.getLogger(__name__)

DEFAULT_TOP_N = 40


@dataclass(frozen=True)
class CohortEntry:
    speaker_id: str
    vec: np.ndarray
    domain: str = ''
    language: str = ''


@dataclass(frozen=True)
class Cohort:
    entries: tuple
    tag: str = 'cohort'

    def __post_init__(self):
        ids = [e.speaker_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ParamInvalid('cohort speaker ids must be unique')
        if self.entries:
            matrix = normalize_rows(np.vstack([e.vec for e in self.entries]))
        else:
            matrix = np.zeros((0, 0))
        object.__setattr__(self, '_matrix', matrix)
        object.__setattr__(self, '_ids', np.array(ids, dtype=object))

    def __len__(self):
        return len(self.entries)

    def scores(self, x):
        return self._matrix @ l2_normalize(x)

    def exclusion_mask(self, speaker_ids):
        if not speaker_ids:
            return None
        return ~np.isin(self._ids, list(speaker_ids))


@dataclass(frozen=True)
class SnormStats:
    mu: float
    sigma: float
    top_n: int
    cohort_tag: str = ''


@dataclass(frozen=True)
class LanguageOffset:
    alpha: float
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TrialScore:
    model_id: str
    test_id: str
    raw: float
    normalized: float
    calibrated: float = None


def build_cohort(embeddings, domains=None, tag='cohort'):
    """One entry per speaker: the average of its length-normalized embeddings."""
    by_speaker = {}
    for emb in embeddings:
        if domains is not None and emb.domain not in domains:
            continue
        by_speaker.setdefault(emb.speaker_id, []).append(emb)
    entries = []
    for speaker_id in sorted(by_speaker):
        members = by_speaker[speaker_id]
        entries.append(CohortEntry(
            speaker_id=speaker_id,
            vec=average_embedding(members),
            domain=members[0].domain,
            language=members[0].language,
        ))
    return Cohort(entries=tuple(entries), tag=tag)


def cohort_from_prototypes(protos, indices, tag='prototypes'):
    return Cohort(
        entries=tuple(
            CohortEntry(
                speaker_id=protos.speakers[j].speaker_id,
                vec=protos.W[:, j],
                domain=protos.speakers[j].domain,
                language=protos.speakers[j].language,
            )
            for j in indices
        ),
        tag=tag,
    )


def build_enrollment_model(utts):
    return average_embedding(utts)


def snorm_stats(x, cohort, top_n=DEFAULT_TOP_N, exclude=()):
    """Mean and population std of the top_n cohort scores of x."""
    if top_n < 2:
        raise ParamInvalid(f'top_n must be at least 2, got {top_n}')
    if len(cohort) == 0:
        raise EmptySet('cohort is empty')
    scores = cohort.scores(x)
    mask = cohort.exclusion_mask(exclude)
    if mask is not None:
        scores = scores[mask]
        if len(scores) == 0:
            raise EmptySet('cohort is empty after excluding the enrollment speakers')
    if top_n > len(scores):
        logger.warning(
            'top_n=%d exceeds the cohort size %d; using the whole cohort', top_n, len(scores),
        )
    selected = np.sort(scores)[::-1][:top_n]
    mu = float(np.mean(selected))
    sigma = float(np.std(selected))
    if not sigma > 0.0:
        raise DegenerateCohort(f'selected cohort scores have zero variance (mu={mu})')
    return SnormStats(mu=mu, sigma=sigma, top_n=min(top_n, len(scores)), cohort_tag=cohort.tag)


def adaptive_snorm(raw, stats_e, stats_t):
    return (raw - stats_t.mu) / stats_t.sigma + (raw - stats_e.mu) / stats_e.sigma


def language_dependent_snorm(raw, stats_e, stats_t, offset, test_is_english):
    if not test_is_english:
        return adaptive_snorm(raw, stats_e, stats_t)
    alpha = offset.alpha
    return (raw - stats_t.mu) / stats_t.sigma + (raw - (stats_e.mu - alpha)) / stats_e.sigma


def estimate_alpha(protos, top_n=DEFAULT_TOP_N):
    """alpha = mu_S_FA - mu_S_USA measured on the prototypes.

    mu_S_FA averages, over Farsi prototypes, the top-N imposter mean against
    the other Farsi prototypes; mu_S_USA averages, over USA prototypes, the
    top-N imposter mean against all Farsi prototypes.
    """
    farsi = protos.indices_where(language=Language.FARSI)
    usa = protos.indices_where(language=Language.ENGLISH)
    if len(farsi) < top_n + 1:
        raise ClassTooSmall(f'{len(farsi)} Farsi prototypes, need at least top_n + 1 = {top_n + 1}')
    if not usa:
        raise ClassTooSmall('no USA prototypes')

    cohort = cohort_from_prototypes(protos, farsi, tag='farsi-prototypes')
    mu_fa = np.mean([
        snorm_stats(protos.W[:, j], cohort, top_n, exclude={protos.speakers[j].speaker_id}).mu
        for j in farsi
    ])
    mu_usa = np.mean([snorm_stats(protos.W[:, j], cohort, top_n).mu for j in usa])
    alpha = float(mu_fa - mu_usa)
    logger.info('language offset alpha=%.6f (mu_FA=%.6f, mu_USA=%.6f)', alpha, mu_fa, mu_usa)
    return LanguageOffset(
        alpha=alpha,
        provenance={
            'mu_fa': float(mu_fa),
            'mu_usa': float(mu_usa),
            'top_n': int(top_n),
            'n_farsi': len(farsi),
            'n_usa': len(usa),
        },
    )


def score_trials(trials, enrollment_map, embeddings, cohort=None, offset=None,
                 lid_decisions=None, mode=ScoringMode.SNORM, top_n=DEFAULT_TOP_N,
                 cache=True):
    """Score (model_id, test_id) trials.

    `embeddings` maps utt_id -> Embedding; `enrollment_map` maps model_id ->
    list of utt_ids. Statistics of every enrollment model and every test
    utterance are computed once and reused unless cache is False.
    """
    mode = ScoringMode(mode)
    if mode != ScoringMode.RAW and cohort is None:
        raise ParamInvalid(f'mode {mode} needs an imposter cohort')
    if mode == ScoringMode.SNORM_LID and lid_decisions is None:
        raise MissingLidDecision('mode snorm-lid needs language decisions')
    if mode == ScoringMode.SNORM_LID and offset is None:
        raise ParamInvalid('mode snorm-lid needs a language offset')

    def lookup(utt_id):
        try:
            return embeddings[utt_id]
        except KeyError:
            raise MissingEmbedding(f'no embedding for utterance {utt_id}') from None

    models = {}
    for model_id, _ in trials:
        if model_id not in models:
            utt_ids = enrollment_map.get(model_id)
            if not utt_ids:
                raise MissingEmbedding(f'no enrollment utterances for model {model_id}')
            members = [lookup(u) for u in utt_ids]
            models[model_id] = (
                build_enrollment_model(members),
                {m.speaker_id for m in members},
            )

    stats_cache = {}

    def model_stats(model_id):
        key = ('model', model_id)
        if cache and key in stats_cache:
            return stats_cache[key]
        vec, speakers = models[model_id]
        stats = snorm_stats(vec, cohort, top_n, exclude=speakers)
        stats_cache[key] = stats
        return stats

    def test_stats(test_id):
        key = ('test', test_id)
        if cache and key in stats_cache:
            return stats_cache[key]
        stats = snorm_stats(lookup(test_id).vec, cohort, top_n)
        stats_cache[key] = stats
        return stats

    results = []
    for model_id, test_id in trials:
        model_vec, _ = models[model_id]
        raw = cosine(model_vec, lookup(test_id).vec)
        if mode == ScoringMode.RAW:
            normalized = raw
        elif mode == ScoringMode.SNORM:
            normalized = adaptive_snorm(raw, model_stats(model_id), test_stats(test_id))
        else:
            decision = lid_decisions.get(test_id)
            if decision is None:
                raise MissingLidDecision(f'no language decision for utterance {test_id}')
            normalized = language_dependent_snorm(
                raw, model_stats(model_id), test_stats(test_id), offset,
                test_is_english=decision.language == Language.ENGLISH,
            )
        results.append(TrialScore(model_id, test_id, raw, float(normalized)))
    return results


def to_score_set(results, labels=None):
    """ScoreSet of the normalized scores, keyed by (model_id, test_id)."""
    return ScoreSet(
        keys=tuple((r.model_id, r.test_id) for r in results),
        scores=np.array([r.normalized for r in results], dtype=np.float64),
        labels=labels,
    )
