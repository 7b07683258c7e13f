import numpy as np

from verification.aam import AamConfig, LabeledBatch, aam_loss, check_instances
from verification.conf import get_setting
from verification.exceptions import DataError, NumericalError
from verification.formats import read_embeddings, read_prototypes
from verification.management.pipeline import PipelineCommand

LOSS_TOLERANCE = 1e-9
GRAD_TOLERANCE = 1e-4


class Command(PipelineCommand):
    help = 'Checks the AAM-softmax loss and gradients on random instances'

    def add_arguments(self, parser):
        parser.add_argument('--instances', type=int, default=100,
                            help='Random instances to check (default: %(default)s)')
        parser.add_argument('--margin', type=float, default=get_setting('AAM_MARGIN'),
                            help='Angular margin m (default: %(default)s)')
        parser.add_argument('--scale', type=float, default=10.0,
                            help='Scale s of the gradient check (default: %(default)s)')
        parser.add_argument('--step', type=float, default=1e-5,
                            help='Finite-difference step (default: %(default)s)')
        parser.add_argument('--seed', type=int, default=get_setting('SEED'),
                            help='Random seed (default: %(default)s)')
        parser.add_argument('--prototypes', help='Also report the loss of these prototypes...')
        parser.add_argument('--embeddings', help='...on these embeddings')

    def handle(self, *args, **options):
        cfg = AamConfig(margin=options['margin'], scale=options['scale'])
        rng = np.random.default_rng(options['seed'])
        worst_loss, worst_grad = check_instances(rng, options['instances'], cfg, options['step'])
        self.stdout.write(f'loss_max_abs_diff={worst_loss!r} grad_max_rel_err={worst_grad!r}')
        if worst_loss > LOSS_TOLERANCE or worst_grad > GRAD_TOLERANCE:
            raise NumericalError(
                f'check failed: loss diff {worst_loss:.3e} (tol {LOSS_TOLERANCE}), '
                f'gradient error {worst_grad:.3e} (tol {GRAD_TOLERANCE})'
            )

        if options['prototypes'] or options['embeddings']:
            self.require(options, 'prototypes', 'embeddings')
            protos = read_prototypes(options['prototypes'])
            index = {speaker_id: j for j, speaker_id in enumerate(protos.speaker_ids)}
            members = [e for e in read_embeddings(options['embeddings']) if e.speaker_id in index]
            if not members:
                raise DataError('no embedding belongs to a prototype speaker')
            batch = LabeledBatch(
                np.vstack([e.vec for e in members]), [index[e.speaker_id] for e in members],
            )
            corpus_cfg = AamConfig(margin=options['margin'], scale=get_setting('AAM_SCALE'))
            self.stdout.write(f'corpus_loss={aam_loss(batch, protos, corpus_cfg)!r} n={batch.n}')
        self.done('AAM check passed')
