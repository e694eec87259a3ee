"""Discrete-event simulator for UAV-aided urban target tracking with ground cameras and edge computing."""

__version__ = "0.1.0"
