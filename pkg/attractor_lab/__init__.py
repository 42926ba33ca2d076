"""attractor-lab: numerical certificates for exponential attraction of global attractors."""

__version__ = "0.1.0"
