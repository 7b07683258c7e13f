"""Entry point of the pipeline: `manage.py <subcommand> [options]`."""
import os
import sys

from django.core.management import execute_from_command_line

from verification.management.pipeline import error_line

SUBCOMMANDS = {
    'synth': 'synth',
    'plan-batches': 'plan_batches',
    'aam-check': 'aam_check',
    'lid-train': 'lid_train',
    'lid-classify': 'lid_classify',
    'alpha': 'alpha',
    'score': 'score',
    'calibrate': 'calibrate',
    'fuse': 'fuse',
    'eval': 'eval',
}

# Django's own commands that stay reachable, mainly for the test runner.
PASSTHROUGH = {'test', 'check', 'shell', 'help', '--help', '-h', '--version'}

USAGE = 'usage: manage.py {%s} [options]' % ','.join(SUBCOMMANDS)


def cli_dispatch(argv=None):
    """Run one subcommand and return its exit code."""
    argv = list(sys.argv if argv is None else argv)
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'svbackend.settings')
    if len(argv) < 2:
        sys.stderr.write(USAGE + '\n')
        return 2
    name = argv[1]
    if name in SUBCOMMANDS:
        argv = [argv[0], SUBCOMMANDS[name], *argv[2:]]
    elif name not in SUBCOMMANDS.values() and name not in PASSTHROUGH:
        sys.stderr.write(error_line('UnknownSubcommand', 2, f'{name!r}; {USAGE}') + '\n')
        return 2
    try:
        execute_from_command_line(argv)
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0
