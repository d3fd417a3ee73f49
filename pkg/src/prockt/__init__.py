"""Process-aware knowledge tracing with LLM-derived proficiency signals."""

__version__ = "0.1.0"
