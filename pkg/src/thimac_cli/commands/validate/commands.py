import logging

import click

from thimac_cli.utilities.config_file import load_config
from thimac_cli.utilities.validators import read_bundle

logger = logging.getLogger(__name__)


@click.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@load_config
def validate(ctx: click.Context, file: str) -> None:
    """Parse and check a .tm document, printing every violation.

    Violations go to stderr as file:line:col RULE message. Warnings are
    printed too but do not fail the check.
    """
    bundle = read_bundle(ctx, file)
    events = len(bundle.behavior.events)
    logger.info("Validated %s: %d event(s), %d warning(s)", file, events, len(bundle.warnings))
    click.echo(
        f"{file}: ok ({len(bundle.model.thimacs)} thimac(s), {len(bundle.model.actions)} action(s), "
        f"{events} event(s), {len(bundle.timelines)} timeline(s), {len(bundle.scenarios)} scenario(s))"
    )
