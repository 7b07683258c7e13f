"""Detection metrics: EER and normalized MinDCF on the ROC staircase.

A trial is accepted when its score is >= the threshold. Thresholds run over
-inf, every distinct score in ascending order, and +inf, so the operating
points go from (P_fa=1, P_miss=0) to (P_fa=0, P_miss=1).
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateLabels, KeyMismatch, ParamInvalid


@dataclass(frozen=True)
class ScoreSet:
    """Parallel arrays of trial keys, scores and optional target labels."""
    keys: tuple
    scores: np.ndarray
    labels: np.ndarray = None
    calibrated: bool = False

    def __post_init__(self):
        keys = tuple(tuple(k) if isinstance(k, list) else k for k in self.keys)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if len(keys) != len(scores):
            raise KeyMismatch(f'{len(keys)} keys but {len(scores)} scores')
        if len(set(keys)) != len(keys):
            raise KeyMismatch('trial keys must be unique')
        object.__setattr__(self, 'keys', keys)
        object.__setattr__(self, 'scores', scores)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=bool).reshape(-1)
            if len(labels) != len(scores):
                raise KeyMismatch(f'{len(labels)} labels for {len(scores)} scores')
            object.__setattr__(self, 'labels', labels)

    def __len__(self):
        return len(self.keys)

    def split(self):
        """(target scores, nontarget scores); both classes must be present."""
        if self.labels is None:
            raise DegenerateLabels('score set carries no labels')
        targets = self.scores[self.labels]
        nontargets = self.scores[~self.labels]
        if len(targets) == 0 or len(nontargets) == 0:
            raise DegenerateLabels(
                f'need both classes, got {len(targets)} targets and {len(nontargets)} nontargets'
            )
        return targets, nontargets


def detection_curve(scores):
    """(thresholds, p_miss, p_fa) at -inf, each distinct score, +inf."""
    targets, nontargets = scores.split()
    targets = np.sort(targets)
    nontargets = np.sort(nontargets)
    thresholds = np.concatenate([[-np.inf], np.unique(scores.scores), [np.inf]])
    misses = np.searchsorted(targets, thresholds, side='left')
    false_alarms = len(nontargets) - np.searchsorted(nontargets, thresholds, side='left')
    return thresholds, misses / len(targets), false_alarms / len(nontargets)


def eer(scores, interpolate=True):
    """Equal error rate at the P_fa/P_miss crossover of the staircase.

    With interpolate=False the crossover vertex closest to the diagonal is
    used instead of the linear interpolation between its neighbours.
    """
    _, p_miss, p_fa = detection_curve(scores)
    gap = p_fa - p_miss
    j = int(np.argmax(gap <= 0))
    if gap[j] == 0:
        return float(p_fa[j])
    if not interpolate:
        k = j - 1 if abs(gap[j - 1]) < abs(gap[j]) else j
        return float((p_fa[k] + p_miss[k]) / 2)
    t = gap[j - 1] / (gap[j - 1] - gap[j])
    return float(p_fa[j - 1] + t * (p_fa[j] - p_fa[j - 1]))


def _check_cost_params(p_target, c_miss, c_fa):
    if not 0.0 < p_target < 1.0:
        raise ParamInvalid(f'p_target {p_target} outside (0, 1)')
    if c_miss <= 0 or c_fa <= 0:
        raise ParamInvalid('detection costs must be positive')


def min_dcf(scores, p_target=0.01, c_miss=1.0, c_fa=1.0):
    """Minimum detection cost over all thresholds, normalized by the cost
    of the best trivial system."""
    _check_cost_params(p_target, c_miss, c_fa)
    _, p_miss, p_fa = detection_curve(scores)
    dcf = (c_miss * p_target * p_miss + c_fa * (1 - p_target) * p_fa)
    norm = min(c_miss * p_target, c_fa * (1 - p_target))
    return float(np.min(dcf / norm))
