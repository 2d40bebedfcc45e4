"""geosquad: a multi-agent geospatial copilot engine and benchmark harness."""

__version__ = "0.1.0"

from .core import (
    DataPointKey,
    ExecutionTrace,
    GoldSolution,
    GoldStep,
    Schedule,
    SubTask,
    TaskPrompt,
    TokenUsage,
    ToolCall,
    ToolSpec,
)

__all__ = [
    "DataPointKey",
    "ExecutionTrace",
    "GoldSolution",
    "GoldStep",
    "Schedule",
    "SubTask",
    "TaskPrompt",
    "TokenUsage",
    "ToolCall",
    "ToolSpec",
    "__version__",
]
