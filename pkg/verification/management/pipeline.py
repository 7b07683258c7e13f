import sys

from django.core.management.base import BaseCommand, CommandError, handle_default_options
from pydantic import ValidationError

from verification.exceptions import UsageError, VerificationError


def error_line(name, code, message):
    """The one-line error record printed by every failing subcommand."""
    message = ' '.join(str(message).split())
    return f'error={name} exit={code} message={message}'


class PipelineCommand(BaseCommand):
    """Base of the pipeline subcommands.

    Toolkit errors leave the command as CommandError carrying the exit code
    of their family: 2 for usage, 3 for data, 4 for numerical errors.
    """
    requires_system_checks = []

    def run_from_argv(self, argv):
        """BaseCommand.run_from_argv, except that a failure prints the bare
        error line (no `CommandError:` prefix) before exiting with its code."""
        self._called_from_command_line = True
        parser = self.create_parser(argv[0], argv[1])
        options = parser.parse_args(argv[2:])
        cmd_options = vars(options)
        args = cmd_options.pop('args', ())
        handle_default_options(options)
        try:
            self.execute(*args, **cmd_options)
        except CommandError as exc:
            if options.traceback:
                raise
            self.stderr.write(str(exc), style_func=lambda line: line)
            sys.exit(exc.returncode)

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except VerificationError as exc:
            raise CommandError(
                error_line(type(exc).__name__, exc.exit_code, exc), returncode=exc.exit_code,
            ) from exc
        except ValidationError as exc:
            raise CommandError(
                error_line('ValidationError', UsageError.exit_code, exc), returncode=UsageError.exit_code,
            ) from exc
        except FileNotFoundError as exc:
            raise CommandError(
                error_line('MissingInput', UsageError.exit_code, exc), returncode=UsageError.exit_code,
            ) from exc

    def require(self, options, *names):
        missing = [f'--{name.replace("_", "-")}' for name in names if not options.get(name)]
        if missing:
            raise UsageError(f'{self.subcommand} needs {", ".join(missing)}')

    @property
    def subcommand(self):
        return self.__module__.rsplit('.', 1)[-1].replace('_', '-')

    def done(self, message):
        self.stdout.write(self.style.SUCCESS(message))
