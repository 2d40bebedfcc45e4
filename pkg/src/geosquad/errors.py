"""Engine exception hierarchy.

ToolError subclasses carry a stable .code string that tool handlers embed
in error payloads; the agent runtime keys dependency hints off those codes.
"""

from __future__ import annotations


class GeoSquadError(Exception):
    """Base class for all engine errors."""


class ContextOverflow(GeoSquadError):
    """Input tokens exceed the configured context budget."""

    def __init__(self, input_tokens: int, budget: int):
        super().__init__(f"input of {input_tokens} tokens exceeds context budget {budget}")
        self.input_tokens = input_tokens
        self.budget = budget


class TransportError(GeoSquadError):
    """HTTP backend failed after exhausting its retries."""


class DuplicateTool(GeoSquadError):
    """A tool name collided during registration or schema rendering."""


class EmptyStore(GeoSquadError):
    """Retrieval requested from an exemplar store with no entries."""


class UnparseableSchedule(GeoSquadError):
    """The planner's reply could not be parsed into a schedule."""


class MaxRevisions(GeoSquadError):
    """The hybrid revise loop hit its revision bound while incomplete."""


class ToolIsolationError(GeoSquadError):
    """An agent attempted to invoke a tool outside its own toolkit."""


class RoundsExhausted(GeoSquadError):
    """An agent used up its tool-round budget without finishing."""


class TemplateGapError(GeoSquadError):
    """Task generation is missing templates for one or more domains."""


class ConfigError(GeoSquadError):
    """Engine configuration file is invalid or references missing paths."""


class ToolError(GeoSquadError):
    """Base for errors raised by sandbox tool handlers."""

    code = "ToolError"

    def payload(self) -> str:
        return f"{self.code}: {self}"


class UnknownRegion(ToolError):
    code = "UnknownRegion"


class DateOutOfRange(ToolError):
    code = "DateOutOfRange"


class MissingProduct(ToolError):
    code = "MissingProduct"

    def __init__(self, message: str, product: str | None = None):
        super().__init__(message)
        self.product = product


class WrongProduct(ToolError):
    code = "WrongProduct"


class UnknownScene(ToolError):
    code = "UnknownScene"


class MalformedArguments(ToolError):
    code = "MalformedArguments"
