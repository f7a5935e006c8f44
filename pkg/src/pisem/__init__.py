"""Interpreting-automata semantics for a small imperative language, with LTL model checking."""

__version__ = "0.1.0"
