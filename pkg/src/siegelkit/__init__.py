"""Numerical toolkit for the family P_alpha(z) = e^{2 pi i alpha} z (1+z)^m.

Submodules:

    family     the maps P, P_alpha, Q, critical data and closed-form constants
    contfrac   continued fractions, convergents, Brjuno sums
    fatou      Fatou coordinates, horn maps, parabolic renormalization
    explosion  parabolic explosion of periodic cycles
    ledger     re-derivation of the constants behind the dynamical estimates
    julia      escape-time rendering, area and density experiments
    cli        command-line front end
"""
from .family import FamilyParams, critical_data

__version__ = "0.1.0"

__all__ = ["FamilyParams", "critical_data", "__version__"]
