"""Deterministic synthetic corpora for exercising the whole pipeline.

Speaker b of domain d gets a base direction normalize(z + a*g + delta*u_d)
where z is isotropic, g a global hub direction with a per-speaker affinity
a ~ U(0, hub_spread) and u_d a per-domain direction. An utterance is
normalize(b + lambda*u_L*[english] + noise) with noise ~ N(0, I/(kappa*D)),
so the concentration kappa is the inverse noise power. The directions g,
u_d and u_L are mutually orthogonal whenever dim is at least 5.

Training speakers of VOX and LIBRI speak English, DEEPMINE speakers speak
Farsi. Held-out DEEPMINE evaluation speakers enroll in Farsi and are tested
in Farsi or English.

Each random stream (directions, noise, test languages, trials) has its own
generator, so relabeling languages with a zero shift changes no vector.
"""
import hashlib
import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .choices import Domain, Language
from .exceptions import SpecInvalid
from .mining import UtteranceInventory, make_rng
from .prototypes import PrototypeMatrix, SpeakerInfo
from .vectors import Embedding, l2_normalize

logger = logging.getLogger(__name__)

STREAM_STRUCTURE = 0
STREAM_NOISE = 1
STREAM_LANGUAGE = 2
STREAM_TRIALS = 3

NATIVE_LANGUAGE = {
    Domain.VOX: Language.ENGLISH,
    Domain.LIBRI: Language.ENGLISH,
    Domain.DEEPMINE: Language.FARSI,
}


class CorpusSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    dim: int = 64
    vox_speakers: int = 120
    libri_speakers: int = 60
    deepmine_speakers: int = 120
    eval_speakers: int = 60
    min_utterances: int = 4
    max_utterances: int = 8
    enroll_utterances: int = 3
    test_utterances: int = 8
    concentration: float = 2.0
    language_shift: float = 0.5
    domain_offset: float = 0.0
    hub_spread: float = 1.0
    english_test_fraction: float = 0.5
    target_trials: int = 480
    nontarget_trials: int = 4800
    seed: int = 0

    @model_validator(mode='after')
    def _check(self):
        if self.dim < 2:
            raise SpecInvalid(f'dim must be at least 2, got {self.dim}')
        counts = {
            'vox_speakers': self.vox_speakers,
            'libri_speakers': self.libri_speakers,
            'deepmine_speakers': self.deepmine_speakers,
            'eval_speakers': self.eval_speakers,
            'min_utterances': self.min_utterances,
            'enroll_utterances': self.enroll_utterances,
            'test_utterances': self.test_utterances,
            'target_trials': self.target_trials,
            'nontarget_trials': self.nontarget_trials,
        }
        for name, value in counts.items():
            if value < 1:
                raise SpecInvalid(f'{name} must be at least 1, got {value}')
        if self.max_utterances < self.min_utterances:
            raise SpecInvalid('max_utterances is below min_utterances')
        if not (np.isfinite(self.concentration) and self.concentration > 0):
            raise SpecInvalid(f'concentration must be positive, got {self.concentration}')
        for name in ('language_shift', 'domain_offset', 'hub_spread'):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise SpecInvalid(f'{name} must be a non-negative number, got {value}')
        if not 0.0 <= self.english_test_fraction <= 1.0:
            raise SpecInvalid('english_test_fraction must lie in [0, 1]')
        if self.seed < 0:
            raise SpecInvalid('seed must be non-negative')
        if self.target_trials > self.eval_speakers * self.test_utterances:
            raise SpecInvalid(
                f'{self.target_trials} target trials requested, only '
                f'{self.eval_speakers * self.test_utterances} same-speaker pairs exist'
            )
        available = self.eval_speakers * (self.eval_speakers - 1) * self.test_utterances
        if self.nontarget_trials > available:
            raise SpecInvalid(
                f'{self.nontarget_trials} nontarget trials requested, only {available} pairs exist'
            )
        return self

    @property
    def domain_counts(self):
        return {
            Domain.VOX: self.vox_speakers,
            Domain.LIBRI: self.libri_speakers,
            Domain.DEEPMINE: self.deepmine_speakers,
        }


@dataclass(frozen=True)
class SyntheticCorpus:
    spec: CorpusSpec
    training: tuple
    evaluation: tuple
    prototypes: PrototypeMatrix
    inventory: UtteranceInventory
    enrollment_map: dict
    trials: tuple
    labels: np.ndarray

    @property
    def embeddings(self):
        return self.training + self.evaluation

    def embedding_index(self):
        return {e.utt_id: e for e in self.embeddings}

    def test_languages(self):
        """Language of the test utterance of every trial."""
        index = self.embedding_index()
        return [index[test_id].language for _, test_id in self.trials]

    def cross_lingual_mask(self):
        return np.array([lang == Language.ENGLISH for lang in self.test_languages()])


def _structure_directions(rng, dim, count):
    """count unit directions, mutually orthogonal when dim allows it."""
    rows = rng.standard_normal((count, dim))
    if dim < count:
        return rows / np.linalg.norm(rows, axis=1)[:, None]
    # Signs follow R so the rows equal sequential Gram-Schmidt.
    q, r = np.linalg.qr(rows.T)
    return (q * np.sign(np.diag(r))).T


def _speaker_base(rng, spec, hub, domain_direction):
    z = rng.standard_normal(spec.dim) / np.sqrt(spec.dim)
    affinity = rng.uniform(0.0, spec.hub_spread)
    return l2_normalize(z + affinity * hub + spec.domain_offset * domain_direction)


def _utterances(noise_rng, spec, base, english, language_direction):
    """Rows of normalized utterance vectors; english is a boolean per row."""
    english = np.asarray(english, dtype=bool)
    noise = noise_rng.standard_normal((len(english), spec.dim)) / np.sqrt(spec.concentration * spec.dim)
    means = np.tile(base, (len(english), 1))
    means[english] += spec.language_shift * language_direction
    rows = means + noise
    return rows / np.linalg.norm(rows, axis=1)[:, None]


def generate_corpus(spec=None):
    """Build training and evaluation embeddings, prototypes, the utterance
    inventory, the enrollment map and a labeled trial list."""
    spec = spec or CorpusSpec()
    structure = make_rng(spec.seed, STREAM_STRUCTURE)
    noise_rng = make_rng(spec.seed, STREAM_NOISE)
    language_rng = make_rng(spec.seed, STREAM_LANGUAGE)
    trial_rng = make_rng(spec.seed, STREAM_TRIALS)

    language_direction, hub, *rest = _structure_directions(structure, spec.dim, 2 + len(Domain))
    domain_directions = dict(zip(Domain, rest))

    training = []
    speakers = []
    columns = []
    for domain, count in spec.domain_counts.items():
        native = NATIVE_LANGUAGE[domain]
        english = native == Language.ENGLISH
        for k in range(count):
            speaker_id = f'{domain.lower()}{k:04d}'
            base = _speaker_base(structure, spec, hub, domain_directions[domain])
            n_utts = int(structure.integers(spec.min_utterances, spec.max_utterances + 1))
            rows = _utterances(noise_rng, spec, base, [english] * n_utts, language_direction)
            training.extend(
                Embedding(f'{speaker_id}-{u:03d}', speaker_id, domain, native, row)
                for u, row in enumerate(rows)
            )
            mean = base + spec.language_shift * language_direction if english else base
            columns.append(l2_normalize(mean))
            speakers.append(SpeakerInfo(speaker_id, domain, native))

    prototypes = PrototypeMatrix(np.column_stack(columns), tuple(speakers))
    inventory = UtteranceInventory.from_embeddings(training, prototypes)

    evaluation = []
    enrollment_map = {}
    tests = []
    E, T = spec.eval_speakers, spec.test_utterances
    for k in range(E):
        speaker_id = f'deepmine-eval{k:04d}'
        base = _speaker_base(structure, spec, hub, domain_directions[Domain.DEEPMINE])
        english = language_rng.random(T) < spec.english_test_fraction
        rows = _utterances(
            noise_rng, spec, base, np.concatenate([np.zeros(spec.enroll_utterances, dtype=bool), english]),
            language_direction,
        )
        enroll_ids = []
        for u in range(spec.enroll_utterances):
            utt_id = f'{speaker_id}-e{u:02d}'
            evaluation.append(Embedding(utt_id, speaker_id, Domain.DEEPMINE, Language.FARSI, rows[u]))
            enroll_ids.append(utt_id)
        enrollment_map[f'{speaker_id}-model'] = tuple(enroll_ids)
        speaker_tests = []
        for u in range(T):
            utt_id = f'{speaker_id}-t{u:02d}'
            language = Language.ENGLISH if english[u] else Language.FARSI
            evaluation.append(Embedding(
                utt_id, speaker_id, Domain.DEEPMINE, language, rows[spec.enroll_utterances + u],
            ))
            speaker_tests.append(utt_id)
        tests.append(speaker_tests)

    models = list(enrollment_map)
    targets = trial_rng.choice(E * T, size=spec.target_trials, replace=False)
    pairs = {(models[i // T], tests[i // T][i % T]): True for i in targets.tolist()}
    # Nontarget pair index -> (model i, other speaker j != i, test utterance u).
    picks = trial_rng.choice(E * (E - 1) * T, size=spec.nontarget_trials, replace=False)
    for index in picks.tolist():
        i, rest = divmod(index, (E - 1) * T)
        j, u = divmod(rest, T)
        j += j >= i
        pairs[(models[i], tests[j][u])] = False
    trials = tuple(sorted(pairs))
    labels = np.array([pairs[t] for t in trials], dtype=bool)

    logger.info(
        'generated %d training and %d evaluation embeddings, %d prototypes, %d trials (seed %d)',
        len(training), len(evaluation), prototypes.N, len(trials), spec.seed,
    )
    return SyntheticCorpus(
        spec=spec,
        training=tuple(training),
        evaluation=tuple(evaluation),
        prototypes=prototypes,
        inventory=inventory,
        enrollment_map=enrollment_map,
        trials=trials,
        labels=labels,
    )


def corpus_digest(corpus):
    """sha256 over every vector, id and label of the corpus."""
    h = hashlib.sha256()
    for e in corpus.embeddings:
        h.update(f'{e.utt_id}\t{e.speaker_id}\t{e.domain}\t{e.language}\n'.encode())
        h.update(np.ascontiguousarray(e.vec, dtype='<f8').tobytes())
    h.update(np.ascontiguousarray(corpus.prototypes.W, dtype='<f8').tobytes())
    for (model_id, test_id), label in zip(corpus.trials, corpus.labels):
        h.update(f'{model_id}\t{test_id}\t{int(label)}\n'.encode())
    return h.hexdigest()
