"""Exact toolkit for Cayley graphs of SL2(Z/q1) x SL2(Z/q2) x SL2(Z/q3):
group enumeration, walk-operator spectra, exact convolution measures,
product-set growth and approximate-homomorphism analysis."""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
