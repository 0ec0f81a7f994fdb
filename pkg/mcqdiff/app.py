# -*- coding: utf-8 -*-
""" mcqdiff: predict MCQ difficulty from persona-conditioned simulations.
This file contains the app module, with the CLI factory function."""
import logging
import os
import sys

import click

from mcqdiff import commands
from mcqdiff.errors import McqdiffError
from mcqdiff.settings import DevConfig, ProdConfig
from mcqdiff.utils import settings

logger = logging.getLogger('mcqdiff')

LOG_FORMAT = '[%(levelname)-7s] %(name)20s : %(message)s'
_handler = None


def init_log(level):
    """Send mcqdiff log records to stderr at ``level``; safe to call repeatedly."""
    global _handler
    if _handler is not None:
        logger.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(_handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger


def config_class():
    """DevConfig when MCQDIFF_DEBUG is set, else ProdConfig."""
    if os.environ.get('MCQDIFF_DEBUG', False):
        return DevConfig
    return ProdConfig


class McqdiffGroup(click.Group):
    """Click group that maps errors to the documented exit codes."""

    def __init__(self, *args, **kwargs):
        super(McqdiffGroup, self).__init__(*args, **kwargs)
        self.error_handlers = []

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super(McqdiffGroup, self).main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except Exception as e:
            for exc_type, handler in self.error_handlers:
                if isinstance(e, exc_type):
                    sys.exit(handler(e))
            raise
        sys.exit(rv if isinstance(rv, int) else 0)


def create_cli(config_object=None):
    """A CLI factory.

    :param config_object: The configuration class used to build each run's config.
    """
    cli = McqdiffGroup(name='mcqdiff', help=__doc__.split('\n')[0].strip())
    cli.params.append(click.Option(['--version'], is_flag=True, expose_value=False, is_eager=True,
                                   callback=_print_version, help='Show the version and exit.'))
    cli.context_settings = dict(help_option_names=['-h', '--help'],
                                obj={'config_class': config_object or config_class()})
    register_errorhandlers(cli)
    register_commands(cli)
    return cli


def _print_version(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo('mcqdiff, version {}'.format(settings.version))
    ctx.exit()


def register_errorhandlers(cli):
    """Register error handlers. Each returns the process exit code."""
    def pipeline_error(error):
        logger.error(str(error))
        return error.exit_code

    def click_error(error):
        error.show()
        return 1

    def abort(error):
        click.echo('Aborted!', err=True)
        return 1

    cli.error_handlers.extend([
        (McqdiffError, pipeline_error),
        (click.ClickException, click_error),
        (click.Abort, abort),
    ])
    return None


def register_commands(cli):
    """Register Click commands."""
    for command in commands.COMMANDS:
        cli.add_command(command)
