from verification.choices import CovarianceType
from verification.conf import get_setting
from verification.formats import read_prototypes, write_gb
from verification.language import adapt_english_mean, train_gb
from verification.management.pipeline import PipelineCommand


class Command(PipelineCommand):
    help = 'Trains the Farsi/English Gaussian backend on speaker prototypes'

    def add_arguments(self, parser):
        parser.add_argument('--prototypes', required=True, help='Prototype file')
        parser.add_argument('--out', required=True, help='Backend file to write')
        parser.add_argument('--english-weight', type=float, default=get_setting('ENGLISH_WEIGHT'),
                            help='Weight of the USA mean in the English mean (default: %(default)s)')
        parser.add_argument('--covariance', choices=CovarianceType.values, default=CovarianceType.FULL,
                            help='Shared covariance type (default: %(default)s)')

    def handle(self, *args, **options):
        gb = train_gb(read_prototypes(options['prototypes']), covariance_type=options['covariance'])
        gb = adapt_english_mean(gb, options['english_weight'])
        write_gb(options['out'], gb)
        self.done(f'Backend (dim {gb.dim}, weight {gb.weight!r}) written to {options["out"]}')
