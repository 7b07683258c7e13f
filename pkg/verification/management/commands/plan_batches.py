from verification.choices import Domain, ImposterDomain, ImposterSelection, PlannerMode
from verification.conf import get_setting
from verification.formats import read_embeddings, read_prototypes, write_manifest
from verification.management.pipeline import PipelineCommand
from verification.mining import PlannerConfig, UtteranceInventory, plan_passes
from verification.prototypes import similarity_matrix


class Command(PipelineCommand):
    help = 'Plans hard-prototype-mining batches for one or more training passes'

    def add_arguments(self, parser):
        parser.add_argument('--prototypes', required=True, help='Prototype file (one snapshot)')
        parser.add_argument('--embeddings', required=True, help='Training embeddings of the speakers')
        parser.add_argument('--out', required=True, help='Batch manifest to write')
        parser.add_argument('--mode', choices=PlannerMode.values, default=PlannerMode.BROAD,
                            help='Planner (default: %(default)s)')
        parser.add_argument('--target-domain', choices=Domain.values, default=Domain.DEEPMINE,
                            help='Target domain of balanced planning (default: %(default)s)')
        parser.add_argument('--passes', type=int, default=1, help='Number of passes (default: %(default)s)')
        parser.add_argument('--first-pass', type=int, default=0, help='Id of the first pass (default: %(default)s)')
        parser.add_argument('--batch-size', type=int, default=get_setting('BATCH_SIZE'),
                            help='Batch size n (default: %(default)s)')
        parser.add_argument('--anchors-per-batch', type=int, default=get_setting('ANCHORS_PER_BATCH'),
                            help='Anchors A per batch (default: %(default)s)')
        parser.add_argument('--imposters-per-anchor', type=int, default=get_setting('IMPOSTERS_PER_ANCHOR'),
                            help='Speakers I per anchor group, anchor included (default: %(default)s)')
        parser.add_argument('--utterances-per-speaker', type=int, default=get_setting('UTTERANCES_PER_SPEAKER'),
                            help='Utterances U per speaker (default: %(default)s)')
        parser.add_argument('--imposters', choices=ImposterSelection.values, default=ImposterSelection.HARD,
                            help='Imposter selection (default: %(default)s)')
        parser.add_argument('--imposter-domain', choices=ImposterDomain.values, default=ImposterDomain.ALL,
                            help='Imposter candidates (default: %(default)s)')
        parser.add_argument('--seed', type=int, default=get_setting('SEED'),
                            help='Random seed (default: %(default)s)')

    def handle(self, *args, **options):
        cfg = PlannerConfig(
            batch_size=options['batch_size'],
            anchors_per_batch=options['anchors_per_batch'],
            imposters_per_anchor=options['imposters_per_anchor'],
            utterances_per_speaker=options['utterances_per_speaker'],
            mode=options['mode'],
            seed=options['seed'],
            imposters=options['imposters'],
            imposter_domain=options['imposter_domain'],
        )
        cfg.check()
        protos = read_prototypes(options['prototypes'])
        inventory = UtteranceInventory.from_embeddings(read_embeddings(options['embeddings']), protos)
        sim = similarity_matrix(protos)
        manifests = plan_passes(
            cfg, [sim] * options['passes'], inventory,
            target_domain=options['target_domain'], first_pass=options['first_pass'],
        )
        write_manifest(options['out'], manifests)

        for manifest in manifests:
            self.stdout.write(
                f'Pass {manifest.pass_id}: {len(manifest.batches)} batches, '
                f'{manifest.padded_slots} padded anchor slots'
            )
        self.done(f'Wrote {len(manifests)} pass(es) to {options["out"]}')
