"""AAM-softmax loss and its analytic gradients.

Both the embeddings and the prototype columns are L2-normalized and the
loss carries no bias terms. The target logit uses cos(theta + m), computed
as cos(theta)cos(m) - sin(theta)sin(m).
"""
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import logsumexp, softmax

from .choices import Domain, Language
from .exceptions import DataError, DimensionMismatch, GradSingularity
from .prototypes import PrototypeMatrix, SpeakerInfo
from .vectors import normalize_rows

COS_CLAMP = 1e-9
GRAD_GUARD = 1e-6


class AamConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    margin: float = Field(default=0.2, ge=0.0, lt=math.pi / 2)
    scale: float = Field(default=30.0, gt=0.0)


@dataclass(frozen=True)
class LabeledBatch:
    embeddings: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.embeddings, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if X.shape[0] < 1 or X.shape[0] != y.shape[0]:
            raise DataError(f'{X.shape[0]} embeddings but {y.shape[0]} labels')
        object.__setattr__(self, 'embeddings', X)
        object.__setattr__(self, 'labels', y)

    @property
    def n(self):
        return self.embeddings.shape[0]


def _cosines(batch, p):
    if batch.embeddings.shape[1] != p.D:
        raise DimensionMismatch(
            f'embedding dim {batch.embeddings.shape[1]} != prototype dim {p.D}'
        )
    if np.any(batch.labels < 0) or np.any(batch.labels >= p.N):
        raise DataError(f'labels must lie in [0, {p.N})')
    Xn = normalize_rows(batch.embeddings)
    Wn = p.normalized_columns()
    return Xn, Wn, Xn @ Wn


def _logits(cos, labels, cfg):
    rows = np.arange(len(labels))
    target = cos[rows, labels]
    sin = np.sqrt(1.0 - target ** 2)
    phi = target * math.cos(cfg.margin) - sin * math.sin(cfg.margin)
    logits = cfg.scale * cos
    logits[rows, labels] = cfg.scale * phi
    return logits, target, sin


def aam_loss(batch, p, cfg=None):
    """Batch mean of the AAM-softmax loss."""
    cfg = cfg or AamConfig()
    _, _, cos = _cosines(batch, p)
    cos = np.clip(cos, -1.0 + COS_CLAMP, 1.0 - COS_CLAMP)
    logits, _, _ = _logits(cos, batch.labels, cfg)
    rows = np.arange(batch.n)
    # Shifting by the target logit keeps every per-sample term >= 0.
    shifted = logits - logits[rows, batch.labels][:, None]
    return float(np.mean(logsumexp(shifted, axis=1)))


def aam_grad(batch, p, cfg=None):
    """Gradients of aam_loss with respect to the raw embeddings (n x D)
    and the raw prototype matrix (D x N)."""
    cfg = cfg or AamConfig()
    Xn, Wn, cos = _cosines(batch, p)
    if np.any(np.abs(cos) >= 1.0 - GRAD_GUARD):
        raise GradSingularity('a cosine lies within 1e-6 of +/-1')
    logits, target, sin = _logits(cos, batch.labels, cfg)
    rows = np.arange(batch.n)

    probs = softmax(logits, axis=1)
    d_logits = probs
    d_logits[rows, batch.labels] -= 1.0
    d_logits /= batch.n

    # d logit / d cos: s everywhere, s * dphi/dcos on the target column.
    d_cos = cfg.scale * d_logits
    dphi = math.cos(cfg.margin) + target * math.sin(cfg.margin) / sin
    d_cos[rows, batch.labels] *= dphi

    g_xn = d_cos @ Wn.T
    g_wn = Xn.T @ d_cos

    # Back through the normalizations: remove the radial component.
    x_norms = np.linalg.norm(batch.embeddings, axis=1)
    g_x = (g_xn - np.sum(g_xn * Xn, axis=1)[:, None] * Xn) / x_norms[:, None]
    w_norms = np.linalg.norm(p.W, axis=0)
    g_w = (g_wn - np.sum(g_wn * Wn, axis=0)[None, :] * Wn) / w_norms[None, :]
    return g_x, g_w


def softmax_cross_entropy(batch, p, scale):
    """Plain softmax cross-entropy over scaled cosine logits."""
    _, _, cos = _cosines(batch, p)
    cos = np.clip(cos, -1.0 + COS_CLAMP, 1.0 - COS_CLAMP)
    logits = scale * cos
    rows = np.arange(batch.n)
    return float(np.mean(logsumexp(logits, axis=1) - logits[rows, batch.labels]))


def finite_difference_grad(batch, p, cfg, step=1e-5):
    """Central finite differences of aam_loss, same layout as aam_grad."""
    X = batch.embeddings.copy()
    g_x = np.zeros_like(X)
    for index in np.ndindex(X.shape):
        original = X[index]
        X[index] = original + step
        up = aam_loss(LabeledBatch(X, batch.labels), p, cfg)
        X[index] = original - step
        down = aam_loss(LabeledBatch(X, batch.labels), p, cfg)
        X[index] = original
        g_x[index] = (up - down) / (2 * step)

    W = p.W.copy()
    g_w = np.zeros_like(W)
    for index in np.ndindex(W.shape):
        original = W[index]
        W[index] = original + step
        up = aam_loss(batch, PrototypeMatrix(W, p.speakers), cfg)
        W[index] = original - step
        down = aam_loss(batch, PrototypeMatrix(W, p.speakers), cfg)
        W[index] = original
        g_w[index] = (up - down) / (2 * step)
    return g_x, g_w


def relative_error(analytic, numeric, floor=1e-3):
    """Largest componentwise |a - f| / max(|a|, |f|, floor * g) where g is
    the largest gradient magnitude; components far below g are compared on
    the scale of g."""
    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))), 1e-12)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor * scale)
    return float(np.max(np.abs(analytic - numeric) / denom))


def _scaled_rows(rng, rows, cols):
    """Random rows with norms drawn uniformly from [0.5, 2]."""
    M = rng.standard_normal((rows, cols))
    M /= np.linalg.norm(M, axis=1)[:, None]
    return M * rng.uniform(0.5, 2.0, size=rows)[:, None]


def random_instance(rng, max_n=8, max_speakers=10, max_dim=16, max_cos=0.95):
    """A random (batch, prototypes) pair whose cosines all stay within
    max_cos of zero, away from the margin's singular angles."""
    while True:
        n = int(rng.integers(1, max_n + 1))
        N = int(rng.integers(2, max_speakers + 1))
        D = int(rng.integers(2, max_dim + 1))
        X = _scaled_rows(rng, n, D)
        W = _scaled_rows(rng, N, D).T
        cos = normalize_rows(X) @ (W / np.linalg.norm(W, axis=0))
        if np.max(np.abs(cos)) <= max_cos:
            break
    speakers = tuple(SpeakerInfo(f'spk{j}', Domain.VOX, Language.ENGLISH) for j in range(N))
    return LabeledBatch(X, rng.integers(0, N, size=n)), PrototypeMatrix(W, speakers)


def check_instances(rng, instances, cfg, step=1e-5):
    """Worst difference to plain softmax cross-entropy at margin 0, scale 1
    and worst gradient relative error over random instances."""
    plain = AamConfig(margin=0.0, scale=1.0)
    worst_loss = 0.0
    worst_grad = 0.0
    for _ in range(instances):
        batch, protos = random_instance(rng)
        worst_loss = max(worst_loss, abs(
            aam_loss(batch, protos, plain) - softmax_cross_entropy(batch, protos, 1.0)
        ))
        g_x, g_w = aam_grad(batch, protos, cfg)
        f_x, f_w = finite_difference_grad(batch, protos, cfg, step)
        worst_grad = max(worst_grad, relative_error(g_x, f_x), relative_error(g_w, f_w))
    return worst_loss, worst_grad
