"""Adaptive engine calibration: measurement planning, data cleaning and ILP map selection."""

__version__ = "0.1.0"
