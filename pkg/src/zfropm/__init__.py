"""Quantitative model of a zero-field-resonance optically pumped magnetometer
in a micro-channel vapour cell: vapour and relaxation physics, optical depth
and pumping, ZFR line shapes, a simulated lock-in chain, curve fitting and
buffer-gas / sensitivity design."""

__version__ = "0.1.0"
