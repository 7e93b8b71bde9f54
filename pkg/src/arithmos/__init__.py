"""Numerical and exact-arithmetic toolkit for boundary dynamics of modular
curves: transfer-operator spectra, limiting modular symbols, mixmaster
cosmology, Schottky-uniformized Green functions, and archimedean L-factors.
"""

__version__ = "0.1.0"
