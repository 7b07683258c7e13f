from collections import Counter

from verification.conf import get_setting
from verification.formats import read_embeddings, read_gb, write_lid
from verification.language import classify_batch
from verification.management.pipeline import PipelineCommand


class Command(PipelineCommand):
    help = 'Detects the language (Farsi or English) of test utterances'

    def add_arguments(self, parser):
        parser.add_argument('--gb', required=True, help='Backend file from lid-train')
        parser.add_argument('--embeddings', required=True, help='Embeddings to classify')
        parser.add_argument('--out', required=True, help='Language decisions file to write')
        parser.add_argument('--threshold', type=float, default=get_setting('LID_THRESHOLD'),
                            help='English when the log-likelihood ratio exceeds this (default: %(default)s)')

    def handle(self, *args, **options):
        decisions = classify_batch(
            read_gb(options['gb']), read_embeddings(options['embeddings']), options['threshold'],
        )
        write_lid(options['out'], decisions)
        counts = Counter(d.language for d in decisions.values())
        for language, count in sorted(counts.items()):
            self.stdout.write(f'{language}: {count}')
        self.done(f'{len(decisions)} decisions written to {options["out"]}')
