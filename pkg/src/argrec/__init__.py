"""Contestable, argumentation-based decision recommendations.

Builds a decision-option ontology and per-option general argumentation
frameworks from policy text, instantiates them against structured case
parameters, scores each option by gradual semantics, and lets humans contest
the shared artifacts globally.
"""

__version__ = "0.1.0"
