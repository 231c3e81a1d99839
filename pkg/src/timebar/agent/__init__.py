from .language import (
    ActionError,
    Diagnostic,
    ParsedStep,
    TOOL_SIGNATURES,
    ToolCall,
    format_call,
    parse_action,
    parse_response,
)
from .loop import AgentConfig, SessionTrace, StepRecord, build_init_prompt, run_session
from .prompts import PromptTemplate, load_template
from .tools import ToolContext, ToolError, dispatch

__all__ = [
    "ActionError",
    "AgentConfig",
    "Diagnostic",
    "ParsedStep",
    "PromptTemplate",
    "SessionTrace",
    "StepRecord",
    "TOOL_SIGNATURES",
    "ToolCall",
    "ToolContext",
    "ToolError",
    "build_init_prompt",
    "dispatch",
    "format_call",
    "load_template",
    "parse_action",
    "parse_response",
    "run_session",
]
