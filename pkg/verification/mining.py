"""Hard prototype mining: batch manifests for an external trainer.

A pass walks over a shuffled set of anchor speakers, A anchors per batch.
Every anchor contributes U utterances from each of its I most similar
speakers (the anchor included), so A * I * U equals the batch size.

Random streams are numpy PCG64 generators seeded from
SeedSequence(seed, spawn_key=(stream, pass_id[, slot])):
stream 0 shuffles the anchors of a pass, stream 1 draws the out-of-domain
anchors of a balanced pass, stream 2 samples utterances for anchor slot
`slot`, stream 3 draws random imposters for anchor slot `slot`.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .choices import Domain, ImposterDomain, ImposterSelection, PlannerMode, RefreshPolicy
from .exceptions import ConfigInvalid, DomainTooSmall, InventoryGap, KTooLarge
from .prototypes import top_similar

logger = logging.getLogger(__name__)

STREAM_PERMUTATION = 0
STREAM_OUT_OF_DOMAIN = 1
STREAM_UTTERANCES = 2
STREAM_IMPOSTERS = 3


class PlannerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    batch_size: int = Field(default=128, ge=1)
    anchors_per_batch: int = Field(default=16, ge=1)
    imposters_per_anchor: int = Field(default=8, ge=1)
    utterances_per_speaker: int = Field(default=1, ge=1)
    mode: PlannerMode = PlannerMode.BROAD
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    refresh: RefreshPolicy = RefreshPolicy.PER_PASS
    imposters: ImposterSelection = ImposterSelection.HARD
    imposter_domain: ImposterDomain = ImposterDomain.ALL

    def check(self):
        group = self.anchors_per_batch * self.imposters_per_anchor * self.utterances_per_speaker
        if group != self.batch_size:
            raise ConfigInvalid(
                f'anchors x imposters x utterances = {self.anchors_per_batch} x '
                f'{self.imposters_per_anchor} x {self.utterances_per_speaker} = {group}, '
                f'batch size is {self.batch_size}'
            )


@dataclass(frozen=True)
class UtteranceInventory:
    """Utterance ids per speaker index, plus the domain of every speaker."""
    utterances: dict
    domains: tuple

    @classmethod
    def from_embeddings(cls, embeddings, protos):
        utterances = {j: [] for j in range(protos.N)}
        index = {speaker_id: j for j, speaker_id in enumerate(protos.speaker_ids)}
        for emb in embeddings:
            j = index.get(emb.speaker_id)
            if j is not None:
                utterances[j].append(emb.utt_id)
        return cls(
            utterances={j: tuple(ids) for j, ids in utterances.items()},
            domains=tuple(info.domain for info in protos.speakers),
        )

    @property
    def N(self):
        return len(self.domains)

    def utterances_of(self, speaker_index):
        utts = self.utterances.get(speaker_index, ())
        if not utts:
            raise InventoryGap(f'speaker {speaker_index} has no utterances')
        return utts

    def check_complete(self, n_speakers):
        missing = [j for j in range(n_speakers) if not self.utterances.get(j)]
        if missing:
            raise InventoryGap(
                f'{len(missing)} speakers have no utterances (first: {missing[0]})'
            )


@dataclass(frozen=True)
class Batch:
    index: int
    anchors: tuple
    entries: tuple


@dataclass(frozen=True)
class BatchManifest:
    pass_id: int
    epoch_tag: int
    batches: tuple
    padded_slots: int = 0
    anchor_order: tuple = field(default=())

    def rows(self):
        """Flat (pass_id, batch_idx, pos, utt_id, speaker_idx) records."""
        for batch in self.batches:
            for pos, (utt_id, speaker_index) in enumerate(batch.entries):
                yield self.pass_id, batch.index, pos, utt_id, speaker_index


def make_rng(seed, *key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def sample_utterances(inv, speaker_index, U, rng):
    """U utterance ids of one speaker: without replacement when there are
    enough of them, with replacement otherwise."""
    utts = inv.utterances_of(speaker_index)
    if len(utts) >= U:
        picks = rng.choice(len(utts), size=U, replace=False)
    else:
        picks = rng.integers(0, len(utts), size=U)
    return [utts[int(i)] for i in picks]


def _imposters(cfg, sim, inv, anchor, pass_id, slot):
    k = cfg.imposters_per_anchor
    if cfg.imposters == ImposterSelection.RANDOM:
        same = np.array(
            [j for j in range(sim.N) if j != anchor and inv.domains[j] == inv.domains[anchor]],
            dtype=np.int64,
        )
        if k - 1 > len(same):
            raise KTooLarge(f'anchor {anchor} has only {len(same)} same-domain speakers')
        rng = make_rng(cfg.seed, STREAM_IMPOSTERS, pass_id, slot)
        return [anchor] + [int(j) for j in rng.choice(same, size=k - 1, replace=False)]
    candidates = None
    if cfg.imposter_domain == ImposterDomain.ANCHOR:
        candidates = [j for j in range(sim.N) if inv.domains[j] == inv.domains[anchor]]
    return top_similar(sim, anchor, k, candidates=candidates)


def _build_manifest(cfg, sim, inv, anchor_order, pass_id):
    A = cfg.anchors_per_batch
    n_batches = -(-len(anchor_order) // A)
    slots = np.resize(np.asarray(anchor_order, dtype=np.int64), n_batches * A)
    padded = len(slots) - len(anchor_order)
    if padded:
        logger.info('pass %d pads %d anchor slots from the start of the order', pass_id, padded)

    batches = []
    for b in range(n_batches):
        anchors = [int(a) for a in slots[b * A:(b + 1) * A]]
        entries = []
        for offset, anchor in enumerate(anchors):
            slot = b * A + offset
            rng = make_rng(cfg.seed, STREAM_UTTERANCES, pass_id, slot)
            for speaker in _imposters(cfg, sim, inv, anchor, pass_id, slot):
                for utt_id in sample_utterances(inv, speaker, cfg.utterances_per_speaker, rng):
                    entries.append((utt_id, speaker))
        batches.append(Batch(index=b, anchors=tuple(anchors), entries=tuple(entries)))
    return BatchManifest(
        pass_id=pass_id,
        epoch_tag=sim.epoch_tag,
        batches=tuple(batches),
        padded_slots=padded,
        anchor_order=tuple(int(a) for a in anchor_order),
    )


def plan_pass_broad(cfg, sim, inv, pass_id=0):
    """One pass in which every training speaker anchors once."""
    cfg.check()
    if cfg.mode != PlannerMode.BROAD:
        raise ConfigInvalid(f'broad planning needs mode=broad, got {cfg.mode}')
    inv.check_complete(sim.N)
    if cfg.imposters_per_anchor > sim.N:
        raise KTooLarge(f'{cfg.imposters_per_anchor} imposters requested, {sim.N} speakers')
    rng = make_rng(cfg.seed, STREAM_PERMUTATION, pass_id)
    order = rng.permutation(sim.N)
    return _build_manifest(cfg, sim, inv, order, pass_id)


def balanced_anchor_order(cfg, inv, target_domain, pass_id=0):
    """All target-domain speakers plus as many out-of-domain speakers drawn
    without replacement, in shuffled order."""
    target_domain = Domain(target_domain)
    target = np.array([j for j, d in enumerate(inv.domains) if d == target_domain], dtype=np.int64)
    others = np.array([j for j, d in enumerate(inv.domains) if d != target_domain], dtype=np.int64)
    if len(target) == 0:
        raise DomainTooSmall(f'no speakers in target domain {target_domain}')
    if len(others) < len(target):
        raise DomainTooSmall(
            f'{len(others)} out-of-domain speakers cannot balance {len(target)} target speakers'
        )
    drawn = make_rng(cfg.seed, STREAM_OUT_OF_DOMAIN, pass_id).choice(
        others, size=len(target), replace=False,
    )
    anchors = np.concatenate([target, np.sort(drawn)])
    return make_rng(cfg.seed, STREAM_PERMUTATION, pass_id).permutation(anchors)


def plan_pass_balanced(cfg, sim, inv, target_domain, pass_id=0):
    """One pass over all target-domain speakers and an equally large fresh
    draw of out-of-domain speakers."""
    cfg.check()
    if cfg.mode != PlannerMode.BALANCED:
        raise ConfigInvalid(f'balanced planning needs mode=balanced, got {cfg.mode}')
    inv.check_complete(sim.N)
    if cfg.imposters_per_anchor > sim.N:
        raise KTooLarge(f'{cfg.imposters_per_anchor} imposters requested, {sim.N} speakers')
    order = balanced_anchor_order(cfg, inv, target_domain, pass_id)
    return _build_manifest(cfg, sim, inv, order, pass_id)


def plan_passes(cfg, snapshots, inv, target_domain=Domain.DEEPMINE, first_pass=0):
    """Plan consecutive passes, one similarity snapshot per pass.

    With refresh='fixed' the first snapshot serves every pass.
    """
    snapshots = list(snapshots)
    manifests = []
    for offset, sim in enumerate(snapshots):
        if cfg.refresh == RefreshPolicy.FIXED:
            sim = snapshots[0]
        pass_id = first_pass + offset
        if cfg.mode == PlannerMode.BALANCED:
            manifests.append(plan_pass_balanced(cfg, sim, inv, target_domain, pass_id))
        else:
            manifests.append(plan_pass_broad(cfg, sim, inv, pass_id))
    return manifests
