import logging
from pathlib import Path

import click

from thimac_cli.dsl.builder import Bundle
from thimac_cli.model.engine import Trace, run
from thimac_cli.model.errors import UnknownEntryError
from thimac_cli.utilities.config_file import get_tool_config, load_config
from thimac_cli.utilities.validators import validate_document

logger = logging.getLogger(__name__)


def summarize(trace: Trace) -> str:
    halted = trace.halted.value if trace.halted else "running"
    return f"steps={trace.steps} fired={len(trace.fired())} reverts={len(trace.reverted())} halted={halted}"


@click.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_name", default=None, help="Scenario declared in FILE. Without it the model runs on declared defaults and no stimuli.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False, writable=True), default=None, help="Write the JSON-lines trace here instead of stdout.")
@click.option("--max-steps", type=click.IntRange(min=0), default=None, help="Step budget. Defaults to max_steps from the config file (1000).")
@click.option("--lenient", is_flag=True, default=False, help="Do not require a binding for every variable the model may read.")
@click.pass_context
@load_config
@validate_document
def simulate(
    ctx: click.Context,
    file: str,
    scenario_name: str | None,
    trace_path: str | None,
    max_steps: int | None,
    lenient: bool,
    bundle: Bundle,
) -> None:
    """Run a scenario and emit its trace as JSON lines.

    The summary line goes to stdout when --trace is given and to stderr
    otherwise, so the trace can be piped.
    """
    scenario = None
    if scenario_name is not None:
        try:
            scenario = bundle.scenario(scenario_name)
        except UnknownEntryError as ex:
            known = ", ".join(s.name for s in bundle.scenarios) or "none"
            raise click.BadParameter(f"{ex} (declared: {known})", param_hint="'--scenario'") from None

    budget = max_steps if max_steps is not None else get_tool_config(ctx).max_steps
    logger.info("Simulating %s (scenario=%s, max_steps=%d)", file, scenario_name, budget)
    state = bundle.start(scenario, strict=not lenient)
    trace = run(state, budget)
    summary = summarize(trace)
    logger.info("Simulation finished: %s", summary)

    if trace_path is not None:
        Path(trace_path).write_text(trace.to_jsonl(), encoding="utf-8")
        click.echo(summary)
    else:
        click.echo(trace.to_jsonl(), nl=False)
        click.echo(summary, err=True)
