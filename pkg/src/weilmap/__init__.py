"""Weil descent specifications and a blinded trilinear map built on them."""

__version__ = "0.1.0"
