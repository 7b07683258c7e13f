"""Scoring-backend experiments on synthetic corpora.

cohort_sweep compares imposter cohorts for adaptive s-norm;
language_offset_comparison compares plain and language-dependent s-norm
on Farsi-enrolled models tested in Farsi and English.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .choices import Domain, Language, ScoringMode
from .language import LidDecision, adapt_english_mean, classify_batch, train_gb
from .metrics import ScoreSet, eer, min_dcf
from .snorm import build_cohort, estimate_alpha, score_trials, to_score_set
from .synthetic import CorpusSpec

logger = logging.getLogger(__name__)

# Slightly separated domains, a mild language shift and strong hub effects.
COHORT_SWEEP_SPEC = CorpusSpec(
    dim=64,
    vox_speakers=120,
    libri_speakers=60,
    deepmine_speakers=120,
    eval_speakers=100,
    test_utterances=10,
    concentration=5.0,
    language_shift=0.25,
    domain_offset=0.2,
    hub_spread=4.0,
    english_test_fraction=0.5,
    target_trials=1000,
    nontarget_trials=10000,
    seed=7,
)

# No domain clusters so that the language offset is the only systematic
# difference between Farsi and USA prototypes. A constant offset only reorders
# cross-lingual trials through the spread of enrollment-side cohort scores,
# which the wide hub spread varies across models.
LANGUAGE_OFFSET_SPEC = CorpusSpec(
    dim=64,
    vox_speakers=120,
    libri_speakers=60,
    deepmine_speakers=120,
    eval_speakers=100,
    test_utterances=10,
    concentration=20.0,
    language_shift=1.0,
    domain_offset=0.0,
    hub_spread=3.0,
    english_test_fraction=0.5,
    target_trials=1000,
    nontarget_trials=10000,
    seed=11,
)

COHORTS = {
    'out_of_domain': (Domain.VOX, Domain.LIBRI),
    'target': (Domain.DEEPMINE,),
    'mixed': (Domain.VOX, Domain.LIBRI, Domain.DEEPMINE),
}


@dataclass(frozen=True)
class MetricRecord:
    condition: str
    eer: float
    min_dcf: float
    trials: int


def _record(condition, scores, p_target, mask=None):
    if mask is not None:
        keep = np.flatnonzero(mask)
        scores = ScoreSet(
            keys=tuple(scores.keys[i] for i in keep),
            scores=scores.scores[keep],
            labels=scores.labels[keep],
        )
    record = MetricRecord(
        condition=condition,
        eer=eer(scores),
        min_dcf=min_dcf(scores, p_target=p_target),
        trials=len(scores),
    )
    logger.info('%s: eer=%.4f min_dcf=%.4f over %d trials',
                condition, record.eer, record.min_dcf, record.trials)
    return record


def cohort_sweep(corpus, top_n=40, p_target=0.01):
    """EER/MinDCF without s-norm and with each cohort of COHORTS."""
    embeddings = corpus.embedding_index()
    records = {}
    raw = score_trials(corpus.trials, corpus.enrollment_map, embeddings, mode=ScoringMode.RAW)
    records['none'] = _record('none', to_score_set(raw, corpus.labels), p_target)
    for name, domains in COHORTS.items():
        cohort = build_cohort(corpus.training, domains=domains, tag=name)
        results = score_trials(
            corpus.trials, corpus.enrollment_map, embeddings,
            cohort=cohort, mode=ScoringMode.SNORM, top_n=top_n,
        )
        records[name] = _record(name, to_score_set(results, corpus.labels), p_target)
    return records


def oracle_decisions(corpus):
    """Language decisions equal to the true test languages."""
    return {
        e.utt_id: LidDecision(
            e.language, float('inf') if e.language == Language.ENGLISH else float('-inf'),
        )
        for e in corpus.evaluation
    }


def gb_decisions(corpus, english_weight=0.75, threshold=0.0):
    gb = adapt_english_mean(train_gb(corpus.prototypes), english_weight)
    return classify_batch(gb, corpus.evaluation, threshold=threshold)


def lid_accuracy(corpus, decisions):
    return float(np.mean([decisions[e.utt_id].language == e.language for e in corpus.evaluation]))


def cross_lingual_gain(records):
    """Cross-lingual EER of plain s-norm minus that of language-dependent s-norm."""
    return records[('snorm', 'cross_lingual')].eer - records[('snorm-lid', 'cross_lingual')].eer


def language_offset_comparison(corpus, lid='oracle', top_n=40, p_target=0.01, english_weight=0.75):
    """Plain vs language-dependent s-norm with the target-domain cohort.

    Returns the estimated offset and records keyed by
    (mode, 'all' | 'cross_lingual').
    """
    embeddings = corpus.embedding_index()
    if lid == 'oracle':
        decisions = oracle_decisions(corpus)
    else:
        decisions = gb_decisions(corpus, english_weight)
        logger.info('language backend accuracy %.4f', lid_accuracy(corpus, decisions))
    offset = estimate_alpha(corpus.prototypes, top_n=top_n)
    cohort = build_cohort(corpus.training, domains=(Domain.DEEPMINE,), tag='target')
    cross = corpus.cross_lingual_mask()

    records = {}
    for mode in (ScoringMode.SNORM, ScoringMode.SNORM_LID):
        results = score_trials(
            corpus.trials, corpus.enrollment_map, embeddings, cohort=cohort,
            offset=offset, lid_decisions=decisions, mode=mode, top_n=top_n,
        )
        scores = to_score_set(results, corpus.labels)
        records[(mode.value, 'all')] = _record(f'{mode.value}/all', scores, p_target)
        records[(mode.value, 'cross_lingual')] = _record(
            f'{mode.value}/cross_lingual', scores, p_target, mask=cross,
        )
    logger.info('alpha=%.5f; cross-lingual EER gain of the language offset %.4f',
                offset.alpha, cross_lingual_gain(records))
    return offset, records
