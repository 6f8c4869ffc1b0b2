import logging
from collections.abc import Callable
from functools import update_wrapper
from pathlib import Path

import click

from thimac_cli.dsl.builder import Bundle, build_document
from thimac_cli.dsl.parser import parse_file
from thimac_cli.error_handling.diagnostics import DiagnosticFormatter, ExitStatus, color_enabled
from thimac_cli.model.errors import DslSyntaxError, SemanticError
from thimac_cli.utilities.config_file import get_tool_config

logger = logging.getLogger(__name__)


def get_formatter(ctx: click.Context, path: str | Path) -> DiagnosticFormatter:
    config = get_tool_config(ctx)
    return DiagnosticFormatter(str(path), color=color_enabled(config.color))


def read_bundle(ctx: click.Context, path: str | Path) -> Bundle:
    """Parse and build ``path``. Prints every diagnostic and exits 1 when the document is invalid."""
    formatter = get_formatter(ctx, path)
    try:
        bundle = build_document(parse_file(path))
    except (DslSyntaxError, SemanticError) as ex:
        logger.info("%s is invalid: %d problem(s)", path, len(ex.violations))
        formatter.echo(ex.violations)
        ctx.exit(ExitStatus.INVALID)
    formatter.echo(bundle.warnings)
    return bundle


def validate_document(f: Callable) -> Callable:
    """Decorator that builds the document named by the ``file`` argument and passes it on as ``bundle``.

    Must sit below ``load_config`` so the color setting is known.
    """

    @click.pass_context
    def wrapper(ctx: click.Context, *args, **kwargs) -> Callable:  # noqa: ANN002, ANN003
        kwargs["bundle"] = read_bundle(ctx, kwargs["file"])
        return ctx.invoke(f, *args, **kwargs)

    return update_wrapper(wrapper, f)
