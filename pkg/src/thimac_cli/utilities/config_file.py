import json
import logging
from collections.abc import Callable
from functools import update_wrapper
from pathlib import Path
from typing import cast

import click

from thimac_cli.configuration import ToolConfig

logger = logging.getLogger(__name__)


def get_tool_config(ctx: click.Context) -> ToolConfig:
    """Helper to get typed config from context."""
    return cast(ToolConfig, ctx.obj)


def get_config_file_path() -> Path:
    homedir = Path.home()
    config_file_path = homedir / ".config/thimac-cli"
    config_file_name = "config.json"
    return Path(config_file_path / config_file_name)


def get_config_file_contents(filepath: Path) -> dict:
    return json.loads(filepath.read_text())


def read_config_file() -> dict | None:
    """Read and parse the config file. Returns None if the file does not exist."""
    config_file = get_config_file_path()
    if not config_file.is_file():
        return None
    return get_config_file_contents(config_file)


def load_config(f: Callable) -> Callable:
    """
    Decorator for subcommands that need settings. Places a ToolConfig on ctx.obj,
    built from the dict main() already read or from the config file. A missing
    file means defaults; an unreadable or invalid one exits with status 1.
    """

    @click.pass_context
    def wrapper(ctx: click.Context, *args, **kwargs) -> Callable:  # noqa: ANN002, ANN003
        # Reuse pre-parsed config from context if available (set by main())
        if isinstance(ctx.obj, ToolConfig):
            logger.debug("Reusing pre-parsed config from context")
        else:
            try:
                config_dict = ctx.obj if isinstance(ctx.obj, dict) else read_config_file()
                ctx.obj = ToolConfig.from_dict(config_dict or {})
            except (ValueError, OSError) as ex:
                logger.info("Invalid config file: %s", ex)
                click.echo(f"Invalid config file {get_config_file_path()}: {ex}", err=True)
                ctx.exit(1)
            logger.debug("Config loaded: %s", ctx.obj)

        return ctx.invoke(f, *args, **kwargs)

    return update_wrapper(wrapper, f)
