"""Simulation framework for nonbinary LDPC codes with EMS / Min-Max decoders."""

__version__ = "0.1.0"
