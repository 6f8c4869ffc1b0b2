import json
import logging

import click

from thimac_cli.configuration import ToolConfig
from thimac_cli.utilities.config_file import (
    get_config_file_contents,
    get_config_file_path,
    get_tool_config,
    load_config,
)

logger = logging.getLogger(__name__)


def get_config_file_template_contents() -> dict:
    """Return the template for a new config file."""
    return ToolConfig().to_dict()


@click.group()
def config() -> None:
    """Create, validate, and show CLI configuration"""
    pass


@click.command()
@click.pass_context
@load_config
def show(ctx: click.Context) -> None:
    """Print the effective configuration (defaults filled in) as JSON."""
    logger.info("Showing config")
    click.echo(json.dumps(get_tool_config(ctx).to_dict(), indent=4))


@click.command()
def validate() -> None:
    """Check the config file against the known keys and value types."""
    config_file = get_config_file_path()
    if not config_file.is_file():
        click.echo(f"No config file at {config_file}; defaults apply.")
        return
    try:
        ToolConfig.from_dict(get_config_file_contents(config_file))
    except ValueError as ex:
        logger.info("Config validation failed: %s", ex)
        click.echo(f"Error: {ex}", err=True)
        raise click.exceptions.Exit(1) from None
    logger.info("Config file %s is valid", config_file)
    click.echo(f"{config_file}: OK")


@click.command()
def create() -> None:
    """Create a new configuration file based on a template."""
    config_file = get_config_file_path()
    logger.debug("Config file path: %s", config_file)
    if config_file.is_file():
        logger.debug("Config file already exists, prompting for overwrite")
        click.confirm(f"WARNING: {config_file} already exists. Overwrite?", abort=True)
    config_file.parent.mkdir(exist_ok=True, parents=True)
    config_data = get_config_file_template_contents()
    config_file.write_text(json.dumps(config_data, indent=4))
    logger.info("Created template config file at %s", config_file)
    click.echo(f"Wrote template configuration file {config_file}")


config.add_command(create)
config.add_command(validate)
config.add_command(show)
