# CLI entry point and module initialization.
#
# Commands are registered at module level so the group is complete before any
# invocation. Logging setup is deferred to main() so that importing this
# module (e.g. from tests) does not open the real log file.

import logging
import logging.handlers
import os
import sys

import click

from .commands.catalog import commands as catalog_commands
from .commands.config import commands as config_commands
from .commands.export import commands as export_commands
from .commands.query import commands as query_commands
from .commands.simulate import commands as simulate_commands
from .commands.validate import commands as validate_commands
from .error_handling.diagnostics import ExitStatus
from .log import LoggingSetup, file_level, setup_logging
from .model.errors import ThimacError
from .utilities.config_file import read_config_file

logger = logging.getLogger(__name__)


class ThimacCliGroup(click.Group):
    """Click group that reports domain errors escaping a command as runtime failures.

    Expected problems (invalid documents, bad arguments) are handled by the
    commands themselves. Anything else derived from ThimacError, such as an
    engine evaluation error, becomes ``Error: <message>`` on stderr and exit 3.
    """

    def invoke(self, ctx: click.Context):  # noqa: ANN201
        try:
            return super().invoke(ctx)
        except ThimacError as ex:
            logger.info("Command failed: %s", ex)
            click.echo(f"Error: {ex}", err=True)
            ctx.exit(ExitStatus.RUNTIME)


@click.group(cls=ThimacCliGroup)
@click.pass_context
@click.version_option(package_name="thimac-cli")
@click.option("--debug", is_flag=True, help="Enable debug logging")
def cli(ctx: click.Context, debug: bool) -> None:  # noqa: ARG001
    """thimac-cli - model, validate, and simulate thinging machines."""
    # _setup is None when cli() is invoked directly (e.g. from tests via
    # CliRunner) rather than through main(); --debug is then a no-op.
    if debug and _setup is not None:
        stream_handler = logging.StreamHandler()
        stream_handler.setLevel(logging.DEBUG)
        stream_handler.setFormatter(logging.Formatter("%(name)s %(levelname)s %(message)s"))
        _setup.logger.addHandler(stream_handler)
        _setup.handler.setLevel(logging.DEBUG)


def _register_commands() -> None:
    cli.add_command(validate_commands.validate)
    cli.add_command(simulate_commands.simulate)
    cli.add_command(query_commands.query)
    cli.add_command(export_commands.export)
    cli.add_command(catalog_commands.catalog)
    cli.add_command(config_commands.config)


def _configure_logging(config_data: dict | None) -> LoggingSetup:
    """Sets up logging, applies log_level from config if present, and logs the invocation."""
    level = logging.INFO
    if config_data and "log_level" in config_data:
        try:
            level = file_level(config_data["log_level"])
        except ValueError as ex:
            click.echo(f"Error: {ex}", err=True)
            sys.exit(ExitStatus.INVALID)
    setup = setup_logging()
    setup.handler.setLevel(level)
    setup.logger.info("Executing: %s", " ".join(sys.argv[1:]))
    return setup


_register_commands()

# Initialized in main(). None when the module is imported without calling main(),
# which is the case during test runs.
_setup: LoggingSetup | None = None


def main() -> None:
    """Entry point (pyproject.toml console_scripts). Sets up logging, invokes
    the CLI, and logs the exit code before the process exits."""
    # Shell completion re-invokes the CLI with _THIMAC_CLI_COMPLETE set; keep
    # logging out of the completion output.
    if "_THIMAC_CLI_COMPLETE" in os.environ:
        cli()
        return

    try:
        config_data = read_config_file()
    except ValueError as ex:
        click.echo(f"Error: config file is not valid JSON: {ex}", err=True)
        sys.exit(ExitStatus.INVALID)

    global _setup  # noqa: PLW0603
    _setup = _configure_logging(config_data)
    try:
        cli(obj=config_data)
    except SystemExit as e:
        exit_code = e.code if e.code is not None else 0
        # The exit line belongs in the file only.
        for h in list(_setup.logger.handlers):
            if isinstance(h, logging.StreamHandler) and not isinstance(h, logging.handlers.RotatingFileHandler):
                _setup.logger.removeHandler(h)
        _setup.logger.info("Exit: %s", exit_code)
        raise
