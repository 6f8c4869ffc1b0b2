import logging
from pathlib import Path

import click

from thimac_cli.error_handling.diagnostics import ExitStatus
from thimac_cli.model.errors import QuerySyntaxError, SemanticError, UnknownEntryError, UnknownEventError
from thimac_cli.model.query import evaluate, format_answer, parse_query
from thimac_cli.model.timeline import Timeline, timeline_from_jsonl
from thimac_cli.utilities.config_file import load_config
from thimac_cli.utilities.validators import get_formatter, read_bundle

logger = logging.getLogger(__name__)


def _select_timeline(ctx: click.Context, file: str, timeline_name: str | None) -> Timeline:
    path = Path(file)
    if path.suffix == ".jsonl":
        try:
            return timeline_from_jsonl(path.read_text(encoding="utf-8"), timeline_name or path.stem, file=file)
        except SemanticError as ex:
            get_formatter(ctx, file).echo(ex.violations)
            ctx.exit(ExitStatus.INVALID)

    bundle = read_bundle(ctx, file)
    if timeline_name is not None:
        try:
            return bundle.timeline(timeline_name)
        except UnknownEntryError as ex:
            raise click.BadParameter(str(ex), param_hint="'--timeline'") from None
    if not bundle.timelines:
        raise click.UsageError(f"{file} declares no timeline")
    if len(bundle.timelines) > 1:
        names = ", ".join(t.name for t in bundle.timelines)
        raise click.UsageError(f"{file} declares several timelines ({names}); choose one with --timeline")
    return bundle.timelines[0]


@click.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.argument("query_text", metavar="QUERY")
@click.option("--timeline", "timeline_name", default=None, help="Timeline to query when FILE declares several.")
@click.pass_context
@load_config
def query(ctx: click.Context, file: str, query_text: str, timeline_name: str | None) -> None:
    """Answer a temporal query over a timeline.

    FILE is a .tm document or a JSON-lines timeline (.jsonl). QUERY is one of
    when(E), relation(E1, E2), starts_before(E1, E2) or before(E).
    """
    try:
        parsed = parse_query(query_text)
    except QuerySyntaxError as ex:
        logger.info("Rejected query %r: %s", query_text, ex)
        click.echo(f"Error: {ex}", err=True)
        ctx.exit(ExitStatus.USAGE)

    timeline = _select_timeline(ctx, file, timeline_name)
    try:
        answer = evaluate(timeline, parsed)
    except UnknownEventError as ex:
        raise click.BadParameter(f"{ex.message} in timeline {timeline.name}", param_hint="QUERY") from None
    logger.info("Query %s on %s/%s answered", parsed, file, timeline.name)
    click.echo(format_answer(answer))
