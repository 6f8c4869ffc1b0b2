import json
import logging

import click

from thimac_cli.catalog import registry
from thimac_cli.error_handling.diagnostics import ExitStatus

logger = logging.getLogger(__name__)


def _entry(ctx: click.Context, param: click.Parameter, value: str) -> str:  # noqa: ARG001
    if value not in registry.names():
        raise click.BadParameter(f"unknown entry '{value}' (known: {', '.join(registry.names())})")
    return value


@click.group()
def catalog() -> None:
    """Bundled example models"""
    pass


@click.command(name="list")
def list_entries() -> None:
    """List catalog entries with their scenarios and timelines."""
    for name in registry.names():
        bundle = registry.load_bundle(name)
        parts = [f"{len(bundle.behavior.events)} event(s)"]
        if bundle.scenarios:
            parts.append("scenarios: " + ", ".join(s.name for s in bundle.scenarios))
        if bundle.timelines:
            parts.append("timelines: " + ", ".join(t.name for t in bundle.timelines))
        click.echo(f"{name:<10} {'; '.join(parts)}")


@click.command()
@click.argument("name", callback=_entry)
@click.option("--path", "show_path", is_flag=True, default=False, help="Print the fixture path instead of its source.")
def show(name: str, show_path: bool) -> None:
    """Print the .tm source of a catalog entry."""
    logger.info("Showing catalog entry %s", name)
    if show_path:
        click.echo(str(registry.fixture_path(name)))
        return
    click.echo(registry.source(name), nl=False)


def _entries(ctx: click.Context, param: click.Parameter, value: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(_entry(ctx, param, v) for v in value)


@click.command(hidden=True)
@click.argument("names", nargs=-1, callback=_entries)
@click.option("--check", is_flag=True, default=False, help="Report stale goldens without rewriting them.")
@click.pass_context
def regenerate(ctx: click.Context, names: tuple[str, ...], check: bool) -> None:
    """Rebuild the .expected.json goldens from the oracle."""
    stale = []
    for name in names or registry.names():
        if check:
            if json.loads(registry.render_expected(name)) != registry.expected(name):
                stale.append(name)
            continue
        if registry.regenerate(name):
            click.echo(f"{name}: updated")
    if stale:
        click.echo(f"stale goldens: {', '.join(stale)}", err=True)
        ctx.exit(ExitStatus.INVALID)


catalog.add_command(list_entries)
catalog.add_command(show)
catalog.add_command(regenerate)
