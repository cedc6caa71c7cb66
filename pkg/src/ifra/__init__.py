"""Instrumented fall-risk assessment: scale derivation, stratification, evaluation."""
__version__ = "0.1.0"
