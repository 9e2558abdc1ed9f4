"""Belief-state CFR solver with learned bet-size abstractions."""

__version__ = "0.1.0"
