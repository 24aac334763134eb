"""Guided-missile engagement simulator with a two-step predictor
observer that compensates seeker delay in a PN guidance loop."""

__version__ = "0.1.0"
