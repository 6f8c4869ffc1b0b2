from __future__ import annotations

import os
from collections.abc import Iterable
from enum import IntEnum

import click

from thimac_cli.model.errors import Violation


class ExitStatus(IntEnum):
    OK = 0
    INVALID = 1
    USAGE = 2
    RUNTIME = 3


def color_enabled(configured: bool = False) -> bool:
    """TM_COLOR=1 forces color on and TM_COLOR=0 forces it off; otherwise the config value applies."""
    value = os.environ.get("TM_COLOR")
    if value == "1":
        return True
    if value == "0":
        return False
    return configured


class DiagnosticFormatter:
    """Renders violations as ``file:line:col RULE message`` lines.

    Violations without a source position are reported against ``default_file``
    at 0:0 so every line keeps the same machine-parseable shape.
    """

    _colors: dict[bool, str] = {False: "red", True: "yellow"}

    def __init__(self, default_file: str = "<input>", *, color: bool = False) -> None:
        self.default_file = default_file
        self.color = color

    def format(self, violation: Violation) -> str:
        span = violation.span
        location = str(span) if span is not None else f"{self.default_file}:0:0"
        rule = str(violation.rule)
        if self.color:
            rule = click.style(rule, fg=self._colors[violation.warning], bold=True)
        suffix = " (warning)" if violation.warning else ""
        return f"{location} {rule} {violation.message}{suffix}"

    def format_all(self, violations: Iterable[Violation]) -> list[str]:
        return [self.format(v) for v in violations]

    def echo(self, violations: Iterable[Violation]) -> None:
        for line in self.format_all(violations):
            click.echo(line, err=True, color=self.color)
