#!/usr/bin/env python
"""Entry point of hardycalc: `python manage.py hardycalc <subcommand> ...`."""
import os
import sys


def main() -> None:
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'server.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "hardycalc runs on Django; install requirements.txt into the active environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
