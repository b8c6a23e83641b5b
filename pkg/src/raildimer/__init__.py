"""Rail-yard dimer coverings: exact Schur-process kernels, samplers, GUE experiments."""

__version__ = "0.1.0"
