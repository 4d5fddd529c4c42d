"""Online POMDP planning with learned macro-action heuristics."""

__version__ = "0.1.0"
