"""Configuration management for thimac-cli."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO")
DEFAULT_MAX_STEPS = 1000


@dataclass
class ToolConfig:
    """Parsed and validated settings from the optional config file."""

    log_level: str = "INFO"
    max_steps: int = DEFAULT_MAX_STEPS
    color: bool = False

    @classmethod
    def from_dict(cls, config: dict) -> ToolConfig:
        """Create a ToolConfig from a raw config dict.

        Missing keys take their defaults. Raises ValueError with a clear
        message for unknown keys or values of the wrong type.
        """
        unknown = sorted(set(config) - {"log_level", "max_steps", "color"})
        if unknown:
            msg = f"Unknown config key(s): {', '.join(unknown)}"
            raise ValueError(msg)

        log_level = config.get("log_level", "INFO")
        if log_level not in LOG_LEVELS:
            msg = f"Invalid log_level '{log_level}'. Valid values are: {', '.join(LOG_LEVELS)}"
            raise ValueError(msg)

        max_steps = config.get("max_steps", DEFAULT_MAX_STEPS)
        # bool is an int subclass
        if isinstance(max_steps, bool) or not isinstance(max_steps, int) or max_steps < 0:
            msg = f"max_steps must be an integer >= 0, got {max_steps!r}"
            raise ValueError(msg)

        color = config.get("color", False)
        if not isinstance(color, bool):
            msg = f"color must be true or false, got {color!r}"
            raise ValueError(msg)

        logger.debug("ToolConfig: log_level=%s, max_steps=%d, color=%s", log_level, max_steps, color)
        return cls(log_level=log_level, max_steps=max_steps, color=color)

    def to_dict(self) -> dict:
        return asdict(self)
