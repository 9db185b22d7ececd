"""Numerical toolkit for the 1D cubic NLS: split-step solver, wave packets, modified scattering."""
