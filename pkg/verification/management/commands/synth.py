from pathlib import Path

from verification.conf import get_setting
from verification.formats import (
    write_embeddings, write_enrollment, write_key, write_prototypes, write_trials,
)
from verification.management.pipeline import PipelineCommand
from verification.synthetic import CorpusSpec, corpus_digest, generate_corpus

SPEC_FIELDS = [
    'dim', 'vox_speakers', 'libri_speakers', 'deepmine_speakers', 'eval_speakers',
    'min_utterances', 'max_utterances', 'enroll_utterances', 'test_utterances',
    'concentration', 'language_shift', 'domain_offset', 'hub_spread',
    'english_test_fraction', 'target_trials', 'nontarget_trials',
]


class Command(PipelineCommand):
    help = 'Generates a synthetic corpus: embeddings, prototypes, trials, enrollment map and key'

    def add_arguments(self, parser):
        parser.add_argument('--out-dir', required=True, help='Directory for the generated files')
        parser.add_argument('--seed', type=int, default=get_setting('SEED'),
                            help='Random seed (default: %(default)s)')
        parser.add_argument('--binary', action='store_true',
                            help='Write embeddings in the SVEB binary format')
        for name in SPEC_FIELDS:
            field = CorpusSpec.model_fields[name]
            parser.add_argument(
                f'--{name.replace("_", "-")}', dest=name, type=field.annotation,
                default=field.default, help='(default: %(default)s)',
            )

    def handle(self, *args, **options):
        spec = CorpusSpec(seed=options['seed'], **{name: options[name] for name in SPEC_FIELDS})
        corpus = generate_corpus(spec)

        out = Path(options['out_dir'])
        out.mkdir(parents=True, exist_ok=True)
        suffix = 'sveb' if options['binary'] else 'tsv'
        write_embeddings(out / f'train.{suffix}', corpus.training, binary=options['binary'])
        write_embeddings(out / f'eval.{suffix}', corpus.evaluation, binary=options['binary'])
        write_prototypes(out / 'prototypes.tsv', corpus.prototypes)
        write_trials(out / 'trials.tsv', corpus.trials)
        write_enrollment(out / 'enrollment.tsv', corpus.enrollment_map)
        write_key(out / 'trials.key', corpus.trials, corpus.labels)

        self.stdout.write(f'Training embeddings: {len(corpus.training)}')
        self.stdout.write(f'Evaluation embeddings: {len(corpus.evaluation)}')
        self.stdout.write(f'Trials: {len(corpus.trials)} ({int(corpus.labels.sum())} target)')
        self.done(f'corpus={corpus_digest(corpus)}')
