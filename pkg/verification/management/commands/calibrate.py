from pathlib import Path

from verification.calibration import apply_calibration, fit_calibration
from verification.formats import read_calibration, read_scores, write_calibration, write_scores
from verification.management.pipeline import PipelineCommand


class Command(PipelineCommand):
    help = 'Fits a logistic-regression calibration and applies it to a score file'

    def add_arguments(self, parser):
        parser.add_argument('--scores', required=True, help='Score file to calibrate')
        parser.add_argument('--out', required=True, help='Calibrated score file to write')
        parser.add_argument('--train', help='Labeled score file to fit on (default: --scores)')
        parser.add_argument('--model', help='Apply this calibration model instead of fitting one')
        parser.add_argument('--model-out', help='Save the fitted model here')

    def handle(self, *args, **options):
        scores = read_scores(options['scores'])
        if options['model']:
            model = read_calibration(options['model'])
        else:
            train_path = options['train'] or options['scores']
            model = fit_calibration(read_scores(train_path), tag=Path(train_path).name)
            self.stdout.write(f'Fitted a={model.a!r} b={model.b!r} in {model.iterations} iterations')
            if options['model_out']:
                write_calibration(options['model_out'], model)
        write_scores(options['out'], apply_calibration(model, scores))
        self.done(f'Calibrated scores written to {options["out"]}')
