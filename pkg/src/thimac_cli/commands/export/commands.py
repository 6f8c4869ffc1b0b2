import logging

import click

from thimac_cli.dsl.builder import Bundle
from thimac_cli.dsl.exporters import ExportLevel, export_dot, export_json
from thimac_cli.utilities.config_file import load_config
from thimac_cli.utilities.validators import validate_document

logger = logging.getLogger(__name__)


@click.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "output_format", type=click.Choice(["dot", "json"]), default="dot", show_default=True)
@click.option("--level", type=click.Choice([level.value for level in ExportLevel]), default=ExportLevel.STATIC.value, show_default=True, help="Diagram level for DOT output.")
@click.option("--simplify", is_flag=True, default=False, help="Contract release/transfer/receive chains in the static diagram.")
@click.option("--name", "graph_name", default=None, help="Graph name for DOT output. Defaults to the file stem.")
@click.pass_context
@load_config
@validate_document
def export(
    ctx: click.Context,
    file: str,
    output_format: str,
    level: str,
    simplify: bool,
    graph_name: str | None,
    bundle: Bundle,
) -> None:
    """Render a document as Graphviz DOT or JSON on stdout."""
    logger.info("Exporting %s as %s (level=%s, simplify=%s)", file, output_format, level, simplify)
    if output_format == "json":
        click.echo(export_json(bundle.document), nl=False)
        return
    name = graph_name or click.format_filename(file, shorten=True).rsplit(".", 1)[0]
    click.echo(export_dot(bundle.document, level, name=name, simplified=simplify), nl=False)
