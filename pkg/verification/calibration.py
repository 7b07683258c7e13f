"""Logistic-regression score calibration and weighted score fusion."""
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .exceptions import KeyMismatch, NonConvergence, ParamInvalid, WeightInvalid
from .metrics import ScoreSet

logger = logging.getLogger(__name__)

L2_PENALTY = 1e-6
GRAD_TOL = 1e-9
MAX_ITER = 10_000


@dataclass(frozen=True)
class CalibrationModel:
    """s' = a * s + b, in the log-odds domain."""
    a: float
    b: float
    tag: str = ''
    iterations: int = 0


def _objective(params, s, y, penalty):
    z = params[0] * s + params[1]
    return float(np.sum(np.logaddexp(0.0, z) - y * z) + 0.5 * penalty * (params @ params))


def _gradient_hessian(params, s, y, penalty):
    p = expit(params[0] * s + params[1])
    r = p - y
    grad = np.array([r @ s, np.sum(r)]) + penalty * params
    w = p * (1.0 - p)
    hess = np.array([
        [w @ (s * s), w @ s],
        [w @ s, np.sum(w)],
    ]) + penalty * np.eye(2)
    return grad, hess


def fit_calibration(scores, tag='', penalty=L2_PENALTY, tol=GRAD_TOL, max_iter=MAX_ITER):
    """Maximize the L2-regularized log-likelihood of the labels under
    sigmoid(a * s + b) with damped Newton steps."""
    scores.split()
    s = scores.scores
    y = scores.labels.astype(np.float64)
    params = np.zeros(2)
    f = _objective(params, s, y, penalty)

    for iteration in range(max_iter):
        grad, hess = _gradient_hessian(params, s, y, penalty)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < tol:
            break
        step = -np.linalg.solve(hess, grad)
        slope = float(grad @ step)
        t = 1.0
        while True:
            candidate = params + t * step
            f_new = _objective(candidate, s, y, penalty)
            # Below 1e-10 the objective is flat to rounding; take the step.
            if f_new <= f + 1e-4 * t * slope or t < 1e-10:
                break
            t *= 0.5
        params, f = candidate, f_new
    else:
        grad, _ = _gradient_hessian(params, s, y, penalty)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm >= tol:
            raise NonConvergence(f'calibration did not converge in {max_iter} iterations', grad_norm)
        iteration = max_iter

    if iteration > 0.9 * max_iter:
        logger.warning('calibration needed %d of %d iterations', iteration, max_iter)
    a, b = float(params[0]), float(params[1])
    logger.info('calibration a=%.6f b=%.6f after %d iterations', a, b, iteration)
    return CalibrationModel(a=a, b=b, tag=tag, iterations=iteration)


def apply_calibration(model, scores):
    return replace(scores, scores=model.a * scores.scores + model.b, calibrated=True)


def fuse(score_sets, weights):
    """Weighted average of several systems' scores, in the trial order of
    the first set."""
    score_sets = list(score_sets)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if not score_sets:
        raise ParamInvalid('nothing to fuse')
    if len(weights) != len(score_sets):
        raise WeightInvalid(f'{len(weights)} weights for {len(score_sets)} score sets')
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
        raise WeightInvalid('fusion weights must be positive')
    if not all(ss.calibrated for ss in score_sets):
        logger.warning('fusing score sets that were not calibrated')

    first = score_sets[0]
    keys = first.keys
    columns = []
    labels = None
    for k, ss in enumerate(score_sets):
        if set(ss.keys) != set(keys):
            raise KeyMismatch(f'score set {k} covers different trials than score set 0')
        position = {key: i for i, key in enumerate(ss.keys)}
        order = np.array([position[key] for key in keys], dtype=np.int64)
        if ss.labels is not None:
            if labels is None:
                labels = ss.labels[order]
            elif not np.array_equal(ss.labels[order], labels):
                raise KeyMismatch(f'score set {k} labels disagree with the earlier sets')
        columns.append(ss.scores[order])

    share = weights / weights.sum()
    fused = np.zeros(len(keys))
    for w, column in zip(share, columns):
        fused += w * column
    return ScoreSet(
        keys=keys,
        scores=fused,
        labels=labels,
        calibrated=all(ss.calibrated for ss in score_sets),
    )
