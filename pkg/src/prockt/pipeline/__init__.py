from .types import (
    EmptyRubricError,
    IncompleteVerdictError,
    Indicator,
    IndicatorSet,
    ParseError,
)
from .prompts import render_eval_prompt, render_indicator_prompt, render_student_prompt
from .parsing import extract_json_object, parse_indicators, parse_responses, parse_verdicts
from .ratios import compute_mp_ratios
from .client import (
    ChatClient,
    ChatClientError,
    ChatParams,
    HttpChatClient,
    MockChatClient,
)
from .runner import PipelineReport, PipelineRunner, audit_key, run_pipeline

__all__ = [
    "ChatClient", "ChatClientError", "ChatParams", "EmptyRubricError",
    "HttpChatClient", "IncompleteVerdictError", "Indicator", "IndicatorSet",
    "MockChatClient", "ParseError", "PipelineReport", "PipelineRunner",
    "audit_key", "compute_mp_ratios", "extract_json_object",
    "parse_indicators", "parse_responses", "parse_verdicts",
    "render_eval_prompt", "render_indicator_prompt", "render_student_prompt",
    "run_pipeline",
]
