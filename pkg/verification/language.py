"""Gaussian-backend language detection on speaker prototypes.

Two classes (Farsi, USA English) share one covariance matrix. English test
speech of native Farsi speakers sits between the two class means, so the
English model uses the interpolated mean w * mu_USA + (1 - w) * mu_FA.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .choices import CovarianceType, Language, LidClass
from .exceptions import ClassTooSmall, CovarianceSingular, DimensionMismatch, WeightOutOfRange
from .vectors import l2_normalize, normalize_rows

logger = logging.getLogger(__name__)

RIDGE_SCALE = 1e-4
RIDGE_FLOOR = 1e-6


@dataclass(frozen=True)
class GaussianBackend:
    mu_fa: np.ndarray
    mu_usa: np.ndarray
    mu_en: np.ndarray
    shared_cov: np.ndarray
    weight: float = 1.0
    covariance_type: str = CovarianceType.FULL

    @property
    def dim(self):
        return self.mu_fa.shape[0]

    def _factor(self):
        try:
            return cho_factor(self.shared_cov, lower=True)
        except LinAlgError as exc:
            raise CovarianceSingular('shared covariance is not positive definite') from exc


@dataclass(frozen=True)
class LidDecision:
    language: Language
    llr: float


def default_class_of(info):
    """Farsi prototypes form the Farsi class, English ones the USA class."""
    if info.language == Language.FARSI:
        return LidClass.FARSI
    if info.language == Language.ENGLISH:
        return LidClass.USA
    return None


def train_gb(protos, class_of=None, covariance_type=CovarianceType.FULL):
    """Fit class means and the pooled within-class covariance on the
    L2-normalized prototypes.

    `class_of` maps a SpeakerInfo (or a speaker id, when a dict is given)
    to LidClass or None; speakers mapped to None are left out.
    """
    if class_of is None:
        class_of = default_class_of
    elif isinstance(class_of, dict):
        mapping = class_of
        class_of = lambda info: mapping.get(info.speaker_id)  # noqa: E731

    Wn = normalize_rows(protos.W.T)
    labels = [class_of(info) for info in protos.speakers]
    farsi = Wn[[j for j, c in enumerate(labels) if c == LidClass.FARSI]]
    usa = Wn[[j for j, c in enumerate(labels) if c == LidClass.USA]]
    for name, members in (('Farsi', farsi), ('USA', usa)):
        if len(members) < 2:
            raise ClassTooSmall(f'{name} class has {len(members)} prototypes, need at least 2')

    mu_fa = farsi.mean(axis=0)
    mu_usa = usa.mean(axis=0)
    centered = np.vstack([farsi - mu_fa, usa - mu_usa])
    pooled = centered.T @ centered / len(centered)
    if covariance_type == CovarianceType.DIAGONAL:
        pooled = np.diag(np.diag(pooled))
    D = pooled.shape[0]
    ridge = max(RIDGE_SCALE * np.trace(pooled) / D, RIDGE_FLOOR)
    cov = (pooled + pooled.T) / 2.0 + ridge * np.eye(D)
    if not np.all(np.isfinite(cov)):
        raise CovarianceSingular('covariance has non-finite entries')

    gb = GaussianBackend(
        mu_fa=mu_fa,
        mu_usa=mu_usa,
        mu_en=mu_usa.copy(),
        shared_cov=cov,
        weight=1.0,
        covariance_type=CovarianceType(covariance_type),
    )
    gb._factor()
    logger.info(
        'trained language backend on %d Farsi and %d USA prototypes (ridge %.3e)',
        len(farsi), len(usa), ridge,
    )
    return gb


def adapt_english_mean(gb, w):
    """Move the English mean to w * mu_USA + (1 - w) * mu_FA."""
    if not 0.0 <= w <= 1.0:
        raise WeightOutOfRange(f'interpolation weight {w} outside [0, 1]')
    return replace(gb, mu_en=w * gb.mu_usa + (1.0 - w) * gb.mu_fa, weight=float(w))


def _log_gaussian(x, mu, factor):
    diff = x - mu
    mahalanobis = float(diff @ cho_solve(factor, diff))
    chol = factor[0]
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (mahalanobis + logdet + len(x) * math.log(2.0 * math.pi))


def _prepare(gb, emb):
    x = emb.vec if hasattr(emb, 'vec') else np.asarray(emb, dtype=np.float64)
    if x.shape != (gb.dim,):
        raise DimensionMismatch(f'embedding shape {x.shape}, backend dim {gb.dim}')
    return l2_normalize(x)


def classify(gb, emb, threshold=0.0):
    """(language, llr) where llr = log N(x; mu_EN) - log N(x; mu_FA)."""
    x = _prepare(gb, emb)
    factor = gb._factor()
    llr = _log_gaussian(x, gb.mu_en, factor) - _log_gaussian(x, gb.mu_fa, factor)
    language = Language.ENGLISH if llr > threshold else Language.FARSI
    return language, llr


def affine_form(gb):
    """(a, b) with llr(x) = a . x + b for the L2-normalized input x."""
    factor = gb._factor()
    precision_en = cho_solve(factor, gb.mu_en)
    precision_fa = cho_solve(factor, gb.mu_fa)
    a = precision_en - precision_fa
    b = -0.5 * (gb.mu_en @ precision_en - gb.mu_fa @ precision_fa)
    return a, float(b)


def classify_batch(gb, embeddings, threshold=0.0):
    """LidDecision per embedding, keyed by utt_id, via the affine form."""
    if not embeddings:
        return {}
    X = np.vstack([e.vec for e in embeddings])
    if X.shape[1] != gb.dim:
        raise DimensionMismatch(f'embedding dim {X.shape[1]}, backend dim {gb.dim}')
    a, b = affine_form(gb)
    llrs = normalize_rows(X) @ a + b
    return {
        e.utt_id: LidDecision(
            Language.ENGLISH if llr > threshold else Language.FARSI, float(llr),
        )
        for e, llr in zip(embeddings, llrs)
    }
