"""Toolkit for crowdsourced implicit discourse-relation annotation analytics:
sense taxonomy, DC/QA elicitation engines, multi-label agreement metrics,
method-bias diagnostics, soft-label training and a live annotation service."""

from .taxonomy import Sense, SenseVocabulary, default_vocabulary, load_vocabulary

__all__ = ["Sense", "SenseVocabulary", "default_vocabulary", "load_vocabulary"]
__version__ = "0.1.0"
