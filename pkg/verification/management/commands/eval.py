from verification.conf import get_setting
from verification.formats import labels_from_key, read_key, read_scores, write_metrics
from verification.management.pipeline import PipelineCommand
from verification.metrics import ScoreSet, eer, min_dcf


class Command(PipelineCommand):
    help = 'Computes EER and MinDCF of a labeled score file'

    def add_arguments(self, parser):
        parser.add_argument('--scores', required=True, help='Score file')
        parser.add_argument('--key', help='Trial key (default: labels of the score file)')
        parser.add_argument('--out', help='Metrics record to write')
        parser.add_argument('--p-target', type=float, default=get_setting('P_TARGET'),
                            help='Target prior of MinDCF (default: %(default)s)')
        parser.add_argument('--c-miss', type=float, default=get_setting('C_MISS'),
                            help='Cost of a miss (default: %(default)s)')
        parser.add_argument('--c-fa', type=float, default=get_setting('C_FA'),
                            help='Cost of a false alarm (default: %(default)s)')
        parser.add_argument('--nearest-vertex', action='store_true',
                            help='EER at the nearest ROC vertex instead of interpolating')

    def handle(self, *args, **options):
        scores = read_scores(options['scores'])
        if options['key']:
            scores = ScoreSet(
                keys=scores.keys, scores=scores.scores,
                labels=labels_from_key(scores.keys, read_key(options['key'])),
            )
        if scores.labels is None:
            self.require(options, 'key')
        value_eer = eer(scores, interpolate=not options['nearest_vertex'])
        value_dcf = min_dcf(scores, options['p_target'], options['c_miss'], options['c_fa'])
        targets, nontargets = scores.split()
        if options['out']:
            write_metrics(options['out'], {
                'eer': value_eer,
                'min_dcf': value_dcf,
                'p_target': options['p_target'],
                'c_miss': options['c_miss'],
                'c_fa': options['c_fa'],
                'interpolated': not options['nearest_vertex'],
                'targets': len(targets),
                'nontargets': len(nontargets),
            })
        self.stdout.write(f'eer={value_eer!r} min_dcf={value_dcf!r}')
