import itertools
import time

import numpy as np
from django.test import SimpleTestCase
from pydantic import ValidationError

from verification.choices import Domain, ImposterDomain, ImposterSelection, PlannerMode, RefreshPolicy
from verification.exceptions import ConfigInvalid, DomainTooSmall, InventoryGap, KTooLarge
from verification.mining import (
    PlannerConfig, UtteranceInventory, make_rng, plan_pass_balanced, plan_pass_broad,
    plan_passes, sample_utterances,
)
from verification.prototypes import SimilarityMatrix, top_similar


def random_sim(rng, N, D=4, epoch_tag=0):
    W = rng.standard_normal((D, N))
    W /= np.linalg.norm(W, axis=0)
    return SimilarityMatrix(np.clip(W.T @ W, -1.0, 1.0), epoch_tag=epoch_tag)


def inventory(counts, domains=None):
    domains = domains or [Domain.VOX] * len(counts)
    return UtteranceInventory(
        utterances={j: tuple(f's{j}u{k}' for k in range(c)) for j, c in enumerate(counts)},
        domains=tuple(domains),
    )


def config(A, I, U, **kwargs):
    return PlannerConfig(
        batch_size=A * I * U, anchors_per_batch=A, imposters_per_anchor=I,
        utterances_per_speaker=U, **kwargs,
    )


class PlannerConfigTests(SimpleTestCase):
    def test_product_must_match_batch_size(self):
        config(16, 8, 1).check()
        with self.assertRaises(ConfigInvalid):
            PlannerConfig(batch_size=128, anchors_per_batch=3, imposters_per_anchor=8).check()

    def test_counts_are_positive(self):
        with self.assertRaises(ValidationError):
            PlannerConfig(anchors_per_batch=0)


class SampleUtterancesTests(SimpleTestCase):
    def test_exactly_u_utterances(self):
        inv = inventory([3])
        picked = sample_utterances(inv, 0, 3, make_rng(0, 2, 0, 0))
        self.assertEqual(sorted(picked), ['s0u0', 's0u1', 's0u2'])

    def test_with_replacement_fallback(self):
        self.assertEqual(sample_utterances(inventory([1]), 0, 2, make_rng(0, 2, 0, 0)), ['s0u0', 's0u0'])

    def test_deterministic(self):
        inv = inventory([10])
        first = sample_utterances(inv, 0, 2, make_rng(42, 2, 0, 5))
        second = sample_utterances(inv, 0, 2, make_rng(42, 2, 0, 5))
        self.assertEqual(first, second)
        self.assertEqual(len(set(first)), 2)

    def test_gap(self):
        inv = UtteranceInventory(utterances={0: ()}, domains=(Domain.VOX,))
        with self.assertRaises(InventoryGap):
            sample_utterances(inv, 0, 1, make_rng(0))


class BroadPassTests(SimpleTestCase):
    def check_manifest(self, cfg, sim, inv, manifest):
        A, I, U = cfg.anchors_per_batch, cfg.imposters_per_anchor, cfg.utterances_per_speaker
        N = sim.N
        self.assertEqual(len(manifest.batches), -(-N // A))
        self.assertEqual(sorted(manifest.anchor_order), list(range(N)))
        slots = [a for batch in manifest.batches for a in batch.anchors]
        self.assertEqual(slots[:N], list(manifest.anchor_order))
        # Padding cycles through the order, more than once when A > N.
        order = manifest.anchor_order
        self.assertEqual(slots[N:], [order[k % N] for k in range(N, len(slots))])
        self.assertEqual(manifest.padded_slots, len(slots) - N)
        for batch in manifest.batches:
            self.assertEqual(len(batch.entries), cfg.batch_size)
            self.assertEqual(len(batch.anchors), A)
            for g, anchor in enumerate(batch.anchors):
                group = batch.entries[g * I * U:(g + 1) * I * U]
                speakers = [s for _, s in group]
                expected = top_similar(sim, anchor, I)
                self.assertEqual(speakers, [s for s in expected for _ in range(U)])
                for utt_id, speaker in group:
                    self.assertIn(utt_id, inv.utterances[speaker])

    def test_exhaustive_small_configs(self):
        rng = np.random.default_rng(20)
        checked = 0
        for N in range(2, 13):
            sim = random_sim(rng, N)
            inv = inventory(rng.integers(1, 4, size=N).tolist())
            for A, I, U in itertools.product(range(1, 13), repeat=3):
                if A * I * U > 12 or I > N:
                    continue
                cfg = config(A, I, U, seed=int(rng.integers(0, 2 ** 32)))
                manifest = plan_pass_broad(cfg, sim, inv)
                self.check_manifest(cfg, sim, inv, manifest)
                self.assertEqual(plan_pass_broad(cfg, sim, inv), manifest)
                checked += 1
        self.assertGreater(checked, 500)

    def test_toy_instance(self):
        sim = random_sim(np.random.default_rng(21), 4)
        manifest = plan_pass_broad(config(2, 2, 1), sim, inventory([2, 2, 2, 2]))
        self.assertEqual(len(manifest.batches), 2)
        anchors = [a for batch in manifest.batches for a in batch.anchors]
        self.assertEqual(sorted(anchors), [0, 1, 2, 3])
        self.assertEqual(manifest.padded_slots, 0)

    def test_more_anchor_slots_than_speakers(self):
        sim = random_sim(np.random.default_rng(27), 2)
        manifest = plan_pass_broad(config(5, 1, 1), sim, inventory([1, 1]))
        first, second = manifest.anchor_order
        self.assertEqual(len(manifest.batches), 1)
        self.assertEqual(manifest.batches[0].anchors, (first, second, first, second, first))
        self.assertEqual(manifest.padded_slots, 3)

    def test_default_batch_shape(self):
        rng = np.random.default_rng(22)
        sim = random_sim(rng, 64, D=16)
        manifest = plan_pass_broad(config(16, 8, 1), sim, inventory([3] * 64))
        self.assertEqual(len(manifest.batches), 4)
        for batch in manifest.batches:
            self.assertEqual(len(batch.entries), 128)

    def test_rows_are_flat_records(self):
        sim = random_sim(np.random.default_rng(23), 4)
        manifest = plan_pass_broad(config(2, 2, 1), sim, inventory([1, 1, 1, 1]), pass_id=3)
        rows = list(manifest.rows())
        self.assertEqual(len(rows), 8)
        self.assertEqual(rows[0][:3], (3, 0, 0))
        self.assertEqual(rows[-1][:3], (3, 1, 3))

    def test_errors(self):
        sim = random_sim(np.random.default_rng(24), 4)
        with self.assertRaises(ConfigInvalid):
            plan_pass_broad(config(2, 2, 1, mode=PlannerMode.BALANCED), sim, inventory([1] * 4))
        with self.assertRaises(InventoryGap):
            plan_pass_broad(config(2, 2, 1), sim, inventory([1, 0, 1, 1]))
        with self.assertRaises(KTooLarge):
            plan_pass_broad(config(1, 5, 1), sim, inventory([1] * 4))

    def test_random_imposters_stay_in_anchor_domain(self):
        rng = np.random.default_rng(25)
        domains = [Domain.VOX] * 6 + [Domain.DEEPMINE] * 6
        sim = random_sim(rng, 12)
        inv = inventory([2] * 12, domains)
        cfg = config(2, 3, 1, imposters=ImposterSelection.RANDOM)
        manifest = plan_pass_broad(cfg, sim, inv)
        for batch in manifest.batches:
            for g, anchor in enumerate(batch.anchors):
                speakers = [s for _, s in batch.entries[g * 3:(g + 1) * 3]]
                self.assertEqual(speakers[0], anchor)
                self.assertEqual(len(set(speakers)), 3)
                self.assertTrue(all(domains[s] == domains[anchor] for s in speakers))
        self.assertEqual(plan_pass_broad(cfg, sim, inv), manifest)

    def test_anchor_domain_imposters(self):
        rng = np.random.default_rng(26)
        domains = [Domain.VOX] * 5 + [Domain.DEEPMINE] * 5
        sim = random_sim(rng, 10)
        inv = inventory([1] * 10, domains)
        cfg = config(2, 3, 1, imposter_domain=ImposterDomain.ANCHOR)
        for batch in plan_pass_broad(cfg, sim, inv).batches:
            for g, anchor in enumerate(batch.anchors):
                speakers = [s for _, s in batch.entries[g * 3:(g + 1) * 3]]
                pool = [j for j in range(10) if domains[j] == domains[anchor]]
                self.assertEqual(speakers, top_similar(sim, anchor, 3, candidates=pool))


class BalancedPassTests(SimpleTestCase):
    def test_small_domain(self):
        domains = [Domain.DEEPMINE] * 5 + [Domain.VOX] * 3
        cfg = config(2, 1, 1, mode=PlannerMode.BALANCED)
        with self.assertRaises(DomainTooSmall):
            plan_pass_balanced(cfg, random_sim(np.random.default_rng(27), 8), inventory([1] * 8, domains),
                               Domain.DEEPMINE)

    def test_toy_anchor_frequencies(self):
        domains = [Domain.DEEPMINE] * 3 + [Domain.VOX] * 10
        sim = random_sim(np.random.default_rng(28), 13)
        inv = inventory([1] * 13, domains)
        cfg = config(2, 1, 1, mode=PlannerMode.BALANCED, seed=5)
        counts = np.zeros(13)
        for pass_id in range(1000):
            manifest = plan_pass_balanced(cfg, sim, inv, Domain.DEEPMINE, pass_id=pass_id)
            order = list(manifest.anchor_order)
            self.assertEqual(len(order), 6)
            self.assertEqual(sorted(a for a in order if a < 3), [0, 1, 2])
            self.assertEqual(len(set(order)), 6)
            counts[list(set(order))] += 1
        np.testing.assert_array_equal(counts[:3], 1000)
        np.testing.assert_allclose(counts[3:] / 1000, 0.3, atol=0.03)

    def test_balance_at_scale(self):
        rng = np.random.default_rng(29)
        F, O, passes = 50, 500, 200
        domains = [Domain.DEEPMINE] * F + [Domain.VOX] * O
        sim = random_sim(rng, F + O, D=8)
        inv = inventory([2] * (F + O), domains)
        cfg = config(10, 2, 1, mode=PlannerMode.BALANCED, seed=9)
        started = time.monotonic()
        counts = np.zeros(F + O)
        for pass_id in range(passes):
            manifest = plan_pass_balanced(cfg, sim, inv, Domain.DEEPMINE, pass_id=pass_id)
            order = np.array(manifest.anchor_order)
            self.assertEqual(len(order), 2 * F)
            self.assertEqual(np.sum(order < F), F)
            self.assertEqual(len(np.unique(order)), 2 * F)
            for batch in manifest.batches:
                self.assertEqual(len(batch.entries), 20)
            counts[order] += 1
        self.assertLess(time.monotonic() - started, 60.0)
        np.testing.assert_array_equal(counts[:F], passes)
        frequency = counts[F:] / passes
        self.assertAlmostEqual(frequency.mean(), F / O, delta=1e-12)
        # Binomial(200, 0.1) per speaker: sd 0.021.
        self.assertLess(np.max(np.abs(frequency - F / O)), 0.1)
        self.assertLess(abs(frequency.std() - 0.0212), 0.006)

    def test_imposters_are_global(self):
        rng = np.random.default_rng(30)
        domains = [Domain.DEEPMINE] * 4 + [Domain.VOX] * 6
        sim = random_sim(rng, 10)
        inv = inventory([1] * 10, domains)
        cfg = config(2, 4, 1, mode=PlannerMode.BALANCED)
        for batch in plan_pass_balanced(cfg, sim, inv, Domain.DEEPMINE).batches:
            for g, anchor in enumerate(batch.anchors):
                speakers = [s for _, s in batch.entries[g * 4:(g + 1) * 4]]
                self.assertEqual(speakers, top_similar(sim, anchor, 4))


class PlanPassesTests(SimpleTestCase):
    def test_refresh_policies(self):
        rng = np.random.default_rng(31)
        snapshots = [random_sim(rng, 6, epoch_tag=t) for t in range(3)]
        inv = inventory([1] * 6)
        fresh = plan_passes(config(2, 2, 1), snapshots, inv)
        self.assertEqual([m.epoch_tag for m in fresh], [0, 1, 2])
        self.assertEqual([m.pass_id for m in fresh], [0, 1, 2])
        fixed = plan_passes(config(2, 2, 1, refresh=RefreshPolicy.FIXED), snapshots, inv, first_pass=4)
        self.assertEqual([m.epoch_tag for m in fixed], [0, 0, 0])
        self.assertEqual([m.pass_id for m in fixed], [4, 5, 6])

    def test_balanced_passes_draw_fresh_out_of_domain_anchors(self):
        rng = np.random.default_rng(32)
        domains = [Domain.DEEPMINE] * 2 + [Domain.LIBRI] * 8
        sim = random_sim(rng, 10)
        cfg = config(2, 1, 1, mode=PlannerMode.BALANCED)
        manifests = plan_passes(cfg, [sim] * 10, inventory([1] * 10, domains))
        drawn = {tuple(sorted(a for a in m.anchor_order if a >= 2)) for m in manifests}
        self.assertGreater(len(drawn), 1)
