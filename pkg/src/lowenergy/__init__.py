"""Numerical laboratory for the d_psi metric on low-energy potential spaces,
realized in the toric model where geodesics are affine in the Legendre dual."""

__version__ = "0.1.0"
