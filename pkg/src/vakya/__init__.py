"""Classical-language NLU toolkit: scripts, retrieval, KG-QA, and evaluation."""

__version__ = "0.1.0"
