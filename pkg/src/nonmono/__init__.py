"""Nonmonotonic inference operations over finite propositional vocabularies."""

__version__ = "0.1.0"
