# run.py - Command Line Entry Point
import sys

import click
from flask.cli import FlaskGroup

from app import create_app

cli = FlaskGroup(create_app=create_app, add_default_commands=False,
                 help='Competence-based curriculum experiments.')


def main(argv=None):
    """Exit codes: 0 success, 1 usage error, 2 runtime error"""
    try:
        cli.main(args=argv, prog_name='ccl', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        sys.exit(1)
    except click.ClickException as e:
        e.show()
        sys.exit(2)
    except click.Abort:
        click.echo('Aborted!', err=True)
        sys.exit(1)
    return 0


if __name__ == '__main__':
    sys.exit(main())
