"""cmlv - CM elliptic curve L-values and their 2-/3-adic valuations."""

from importlib.metadata import version

__version__ = version(__package__)
