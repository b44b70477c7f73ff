"""Spectral and Monte-Carlo toolkit for the focusing Gibbs measure on the radial disc."""

__version__ = "0.1.0"

from . import bessel, disc_spectrum, gff, ground_state, linops, partition, soliton  # noqa: F401
