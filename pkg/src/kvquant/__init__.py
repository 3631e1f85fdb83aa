"""Constant-of-motion versus Hamiltonian quantization of the forced harmonic oscillator."""

__version__ = "0.1.0"
