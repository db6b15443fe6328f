"""Cavity-assisted enantiomer discrimination: models, analytics and simulations."""

__version__ = "0.1.0"
