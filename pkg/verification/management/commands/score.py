from verification.choices import Domain, ScoringMode
from verification.conf import get_setting
from verification.formats import (
    labels_from_key, read_alpha, read_embeddings, read_enrollment, read_key,
    read_lid, read_trials, write_scores,
)
from verification.management.pipeline import PipelineCommand
from verification.snorm import build_cohort, score_trials, to_score_set


class Command(PipelineCommand):
    help = 'Scores trials with raw cosine, adaptive s-norm or language-dependent s-norm'

    def add_arguments(self, parser):
        parser.add_argument('--embeddings', required=True, help='Enrollment and test embeddings')
        parser.add_argument('--trials', required=True, help='Trial list')
        parser.add_argument('--enrollment', required=True, help='Enrollment map')
        parser.add_argument('--out', required=True, help='Score file to write')
        parser.add_argument('--mode', choices=ScoringMode.values, default=ScoringMode.SNORM,
                            help='Scoring mode (default: %(default)s)')
        parser.add_argument('--cohort', help='Embeddings of the imposter cohort (s-norm modes)')
        parser.add_argument('--cohort-domain', choices=Domain.values, action='append',
                            help='Keep cohort speakers of this domain; repeatable (default: all)')
        parser.add_argument('--top-n', type=int, default=get_setting('TOP_N'),
                            help='Top-N cohort scores per side (default: %(default)s)')
        parser.add_argument('--lid', help='Language decisions of the test utterances (snorm-lid)')
        parser.add_argument('--alpha', help='Language offset file (snorm-lid)')
        parser.add_argument('--key', help='Trial key; labels are appended to the scores')

    def handle(self, *args, **options):
        mode = ScoringMode(options['mode'])
        if mode != ScoringMode.RAW:
            self.require(options, 'cohort')
        if mode == ScoringMode.SNORM_LID:
            self.require(options, 'lid', 'alpha')

        embeddings = {e.utt_id: e for e in read_embeddings(options['embeddings'])}
        trials = read_trials(options['trials'])
        cohort = None
        if options['cohort']:
            cohort = build_cohort(
                read_embeddings(options['cohort']), domains=options['cohort_domain'],
                tag=','.join(options['cohort_domain'] or ['all']),
            )
            self.stdout.write(f'Cohort: {len(cohort)} speakers ({cohort.tag})')
        results = score_trials(
            trials,
            read_enrollment(options['enrollment']),
            embeddings,
            cohort=cohort,
            offset=read_alpha(options['alpha']) if options['alpha'] else None,
            lid_decisions=read_lid(options['lid']) if options['lid'] else None,
            mode=mode,
            top_n=options['top_n'],
        )
        labels = None
        if options['key']:
            labels = labels_from_key(trials, read_key(options['key']))
        write_scores(options['out'], to_score_set(results, labels))
        self.done(f'{len(results)} trials scored ({mode.value}) to {options["out"]}')
