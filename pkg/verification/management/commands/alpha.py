from verification.conf import get_setting
from verification.formats import read_prototypes, write_alpha
from verification.management.pipeline import PipelineCommand
from verification.snorm import estimate_alpha


class Command(PipelineCommand):
    help = 'Estimates the language offset alpha from Farsi and USA prototypes'

    def add_arguments(self, parser):
        parser.add_argument('--prototypes', required=True, help='Prototype file')
        parser.add_argument('--out', required=True, help='Offset file to write')
        parser.add_argument('--top-n', type=int, default=get_setting('TOP_N'),
                            help='Cohort size of the imposter means (default: %(default)s)')

    def handle(self, *args, **options):
        offset = estimate_alpha(read_prototypes(options['prototypes']), top_n=options['top_n'])
        write_alpha(options['out'], offset)
        self.done(f'alpha={offset.alpha!r}')
