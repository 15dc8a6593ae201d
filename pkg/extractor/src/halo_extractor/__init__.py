"""Trace extraction for the halo scoring engine."""

from .countdf import count_doc_freq
from .extract import ExtractionJob, build_prompt, extract_trace, write_trace
from .model import BUILTIN_PREFIX, ExtractionError, load_model
from .tagging import annotate_keywords, build_typed_text, build_typed_tokens, concept_entity_type

__version__ = "0.1.0"
