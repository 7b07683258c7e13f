from verification.calibration import fuse
from verification.formats import read_scores, write_scores
from verification.management.pipeline import PipelineCommand


class Command(PipelineCommand):
    help = 'Fuses the scores of several systems by a weighted average'

    def add_arguments(self, parser):
        parser.add_argument('--scores', nargs='+', required=True, help='Score files, one per system')
        parser.add_argument('--weights', nargs='+', type=float,
                            help='Positive weight per system (default: all 1)')
        parser.add_argument('--out', required=True, help='Fused score file to write')
        parser.add_argument('--calibrated', action='store_true',
                            help='The inputs were calibrated (silences the warning)')

    def handle(self, *args, **options):
        score_sets = [read_scores(path, calibrated=options['calibrated']) for path in options['scores']]
        weights = options['weights'] or [1.0] * len(score_sets)
        fused = fuse(score_sets, weights)
        write_scores(options['out'], fused)
        self.done(f'Fused {len(score_sets)} systems over {len(fused)} trials to {options["out"]}')
