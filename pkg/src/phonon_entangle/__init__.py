"""Entangled phonon-state engineering in multi-membrane optomechanical cavities."""

__version__ = "0.1.0"
