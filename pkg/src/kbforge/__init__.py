"""kbforge: a knowledge-base engine for typed first-order logic with inductive definitions."""

__version__ = "0.1.0"
