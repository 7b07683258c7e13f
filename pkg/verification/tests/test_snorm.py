import numpy as np
from django.test import SimpleTestCase

from verification.choices import Domain, Language, ScoringMode
from verification.exceptions import (
    ClassTooSmall, DegenerateCohort, EmptySet, MissingEmbedding, MissingLidDecision, ParamInvalid,
)
from verification.language import LidDecision
from verification.prototypes import PrototypeMatrix, SpeakerInfo
from verification.snorm import (
    Cohort, CohortEntry, LanguageOffset, SnormStats, adaptive_snorm, build_cohort,
    estimate_alpha, language_dependent_snorm, score_trials, snorm_stats, to_score_set,
)
from verification.vectors import Embedding, average_embedding, cosine


def at_cosine(c):
    return np.array([c, np.sqrt(1.0 - c * c)])


def cohort_of(vectors):
    return Cohort(tuple(CohortEntry(f'c{k}', np.asarray(v, dtype=np.float64)) for k, v in enumerate(vectors)))


def unit(degrees):
    return np.array([np.cos(np.radians(degrees)), np.sin(np.radians(degrees))])


class SnormStatsTests(SimpleTestCase):
    def test_top_n_mean_and_std(self):
        stats = snorm_stats([1.0, 0.0], cohort_of([at_cosine(0.1), at_cosine(0.9), at_cosine(0.5)]), top_n=2)
        self.assertAlmostEqual(stats.mu, 0.7, places=12)
        self.assertAlmostEqual(stats.sigma, 0.2, places=12)
        self.assertEqual(stats.top_n, 2)

    def test_whole_cohort_when_top_n_is_too_large(self):
        cohort = cohort_of([at_cosine(0.1), at_cosine(0.9), at_cosine(0.5)])
        with self.assertLogs('verification.snorm', level='WARNING'):
            stats = snorm_stats([1.0, 0.0], cohort, top_n=5)
        self.assertAlmostEqual(stats.mu, 0.5, places=12)
        self.assertEqual(stats.top_n, 3)

    def test_exclusion(self):
        cohort = cohort_of([at_cosine(0.9), at_cosine(0.5), at_cosine(0.1)])
        stats = snorm_stats([1.0, 0.0], cohort, top_n=2, exclude={'c0'})
        self.assertAlmostEqual(stats.mu, 0.3, places=12)

    def test_errors(self):
        with self.assertRaises(DegenerateCohort):
            snorm_stats([1.0, 0.0], cohort_of([at_cosine(0.5)] * 3), top_n=2)
        with self.assertRaises(ParamInvalid):
            snorm_stats([1.0, 0.0], cohort_of([at_cosine(0.5), at_cosine(0.1)]), top_n=1)
        with self.assertRaises(EmptySet):
            snorm_stats([1.0, 0.0], Cohort(()), top_n=2)
        with self.assertRaises(EmptySet):
            snorm_stats([1.0, 0.0], cohort_of([at_cosine(0.5)]), top_n=2, exclude={'c0'})

    def test_duplicate_cohort_speakers(self):
        with self.assertRaises(ParamInvalid):
            Cohort((CohortEntry('a', np.ones(2)), CohortEntry('a', np.ones(2))))


class NormalizationTests(SimpleTestCase):
    def test_adaptive_snorm(self):
        stats = SnormStats(mu=0.5, sigma=0.2, top_n=40)
        self.assertAlmostEqual(adaptive_snorm(0.9, stats, stats), 4.0, places=12)

    def test_language_offset_only_for_english_tests(self):
        stats = SnormStats(mu=0.5, sigma=0.2, top_n=40)
        offset = LanguageOffset(alpha=0.1)
        plain = adaptive_snorm(0.9, stats, stats)
        self.assertAlmostEqual(language_dependent_snorm(0.9, stats, stats, offset, True) - plain, 0.5, places=12)
        self.assertEqual(language_dependent_snorm(0.9, stats, stats, offset, False), plain)

    def test_zero_offset_reduces_bit_exactly(self):
        rng = np.random.default_rng(50)
        zero = LanguageOffset(alpha=0.0)
        for raw, mu_e, mu_t, s_e, s_t in zip(
            rng.uniform(-1, 1, 10_000), rng.uniform(-1, 1, 10_000), rng.uniform(-1, 1, 10_000),
            rng.uniform(0.01, 1, 10_000), rng.uniform(0.01, 1, 10_000),
        ):
            stats_e = SnormStats(mu=mu_e, sigma=s_e, top_n=40)
            stats_t = SnormStats(mu=mu_t, sigma=s_t, top_n=40)
            self.assertEqual(
                language_dependent_snorm(raw, stats_e, stats_t, zero, True),
                adaptive_snorm(raw, stats_e, stats_t),
            )

    def test_english_offset_adds_alpha_over_sigma(self):
        rng = np.random.default_rng(52)
        for alpha, sigma in zip(rng.uniform(-0.5, 0.5, 1000), rng.uniform(0.05, 1.0, 1000)):
            stats_e = SnormStats(mu=0.3, sigma=sigma, top_n=40)
            stats_t = SnormStats(mu=0.2, sigma=0.4, top_n=40)
            diff = (language_dependent_snorm(0.6, stats_e, stats_t, LanguageOffset(alpha=alpha), True)
                    - adaptive_snorm(0.6, stats_e, stats_t))
            self.assertAlmostEqual(diff, alpha / sigma, delta=1e-12 * max(1.0, abs(alpha / sigma)))


class EstimateAlphaTests(SimpleTestCase):
    def protos(self):
        angles = [(0.0, Language.FARSI), (10.0, Language.FARSI), (25.0, Language.FARSI),
                  (60.0, Language.ENGLISH), (90.0, Language.ENGLISH)]
        return PrototypeMatrix(
            np.column_stack([unit(a) for a, _ in angles]),
            tuple(SpeakerInfo(f's{k}', Domain.DEEPMINE if lang == Language.FARSI else Domain.VOX, lang)
                  for k, (_, lang) in enumerate(angles)),
        )

    def test_hand_computed(self):
        cos = lambda degrees: np.cos(np.radians(degrees))  # noqa: E731
        offset = estimate_alpha(self.protos(), top_n=2)
        mu_fa = (cos(10) + cos(15) + cos(25)) / 3
        mu_usa = (cos(35) + cos(50) + cos(65) + cos(80)) / 4
        self.assertAlmostEqual(offset.provenance['mu_fa'], mu_fa, places=12)
        self.assertAlmostEqual(offset.provenance['mu_usa'], mu_usa, places=12)
        self.assertAlmostEqual(offset.alpha, mu_fa - mu_usa, places=12)
        self.assertEqual((offset.provenance['n_farsi'], offset.provenance['n_usa']), (3, 2))

    def test_class_sizes(self):
        with self.assertRaises(ClassTooSmall):
            estimate_alpha(self.protos(), top_n=3)
        farsi_only = PrototypeMatrix(
            np.column_stack([unit(0), unit(10), unit(25)]),
            tuple(SpeakerInfo(f's{k}', Domain.DEEPMINE, Language.FARSI) for k in range(3)),
        )
        with self.assertRaises(ClassTooSmall):
            estimate_alpha(farsi_only, top_n=2)


class ScoreTrialsTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(51)
        self.training = [
            Embedding(f'c{s}-{u}', f'c{s}', Domain.DEEPMINE, Language.FARSI, rng.standard_normal(8))
            for s in range(12) for u in range(2)
        ]
        self.cohort = build_cohort(self.training, tag='test')
        self.embeddings = {}
        self.enrollment = {}
        for s in range(3):
            for u in range(2):
                e = Embedding(f'e{s}-{u}', f'e{s}', Domain.DEEPMINE, Language.FARSI, rng.standard_normal(8))
                self.embeddings[e.utt_id] = e
            self.enrollment[f'm{s}'] = (f'e{s}-0', f'e{s}-1')
            for u in range(3):
                e = Embedding(f't{s}-{u}', f'e{s}', Domain.DEEPMINE, Language.UNKNOWN, rng.standard_normal(8))
                self.embeddings[e.utt_id] = e
        self.trials = [(f'm{m}', f't{s}-{u}') for m in range(3) for s in range(3) for u in range(3)]

    def test_raw_is_cosine_with_the_average(self):
        results = score_trials(self.trials, self.enrollment, self.embeddings, mode=ScoringMode.RAW)
        for r in results:
            model = average_embedding([self.embeddings[u] for u in self.enrollment[r.model_id]])
            self.assertAlmostEqual(r.raw, cosine(model, self.embeddings[r.test_id].vec), places=14)
            self.assertEqual(r.normalized, r.raw)

    def test_identical_vectors_score_one(self):
        embeddings = {'a': Embedding('a', 's', Domain.VOX, Language.ENGLISH, [3.0, 4.0]),
                      'b': Embedding('b', 's', Domain.VOX, Language.ENGLISH, [0.6, 0.8])}
        [r] = score_trials([('m', 'b')], {'m': ('a',)}, embeddings, mode=ScoringMode.RAW)
        self.assertAlmostEqual(r.raw, 1.0, places=14)

    def test_snorm_matches_manual_computation(self):
        results = score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4)
        for r in results:
            members = [self.embeddings[u] for u in self.enrollment[r.model_id]]
            model = average_embedding(members)
            stats_e = snorm_stats(model, self.cohort, 4, exclude={members[0].speaker_id})
            stats_t = snorm_stats(self.embeddings[r.test_id].vec, self.cohort, 4)
            self.assertAlmostEqual(r.normalized, adaptive_snorm(r.raw, stats_e, stats_t), places=12)

    def test_all_farsi_decisions_equal_plain_snorm(self):
        decisions = {u: LidDecision(Language.FARSI, -1.0) for u in self.embeddings}
        plain = score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4)
        lid = score_trials(
            self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4,
            offset=LanguageOffset(alpha=0.3), lid_decisions=decisions, mode=ScoringMode.SNORM_LID,
        )
        self.assertEqual([r.normalized for r in plain], [r.normalized for r in lid])

    def test_english_decisions_raise_scores(self):
        english = {u: LidDecision(Language.ENGLISH, 1.0) for u in self.embeddings}
        plain = score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4)
        lid = score_trials(
            self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4,
            offset=LanguageOffset(alpha=0.3), lid_decisions=english, mode=ScoringMode.SNORM_LID,
        )
        for p, q in zip(plain, lid):
            self.assertGreater(q.normalized, p.normalized)

    def test_cache_changes_nothing(self):
        cached = score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4)
        fresh = score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4,
                             cache=False)
        self.assertEqual(cached, fresh)

    def test_missing_inputs(self):
        with self.assertRaises(MissingEmbedding):
            score_trials([('m0', 'nope')], self.enrollment, self.embeddings, mode=ScoringMode.RAW)
        with self.assertRaises(MissingEmbedding):
            score_trials([('m9', 't0-0')], self.enrollment, self.embeddings, mode=ScoringMode.RAW)
        with self.assertRaises(ParamInvalid):
            score_trials(self.trials, self.enrollment, self.embeddings)
        with self.assertRaises(MissingLidDecision):
            score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort,
                         offset=LanguageOffset(alpha=0.1), mode=ScoringMode.SNORM_LID)
        with self.assertRaises(MissingLidDecision):
            score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort, top_n=4,
                         offset=LanguageOffset(alpha=0.1), lid_decisions={}, mode=ScoringMode.SNORM_LID)
        with self.assertRaises(ParamInvalid):
            score_trials(self.trials, self.enrollment, self.embeddings, cohort=self.cohort,
                         lid_decisions={}, mode=ScoringMode.SNORM_LID)

    def test_score_set(self):
        results = score_trials(self.trials, self.enrollment, self.embeddings, mode=ScoringMode.RAW)
        labels = [m[1:] == t[1] for m, t in self.trials]
        scores = to_score_set(results, labels)
        self.assertEqual(scores.keys, tuple(self.trials))
        self.assertEqual(int(scores.labels.sum()), 9)
