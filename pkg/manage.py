#!/usr/bin/env python
"""Command-line entry point: the speaker-verification pipeline subcommands."""
import os
import sys


def main():
    """Run a pipeline subcommand (or any Django administrative task)."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'svbackend.settings')
    try:
        from verification.cli import cli_dispatch
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    sys.exit(cli_dispatch(sys.argv))


if __name__ == '__main__':
    main()
