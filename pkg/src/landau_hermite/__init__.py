"""Hermite-Fourier spectral simulator for the Landau equation of Maxwellian
molecules near equilibrium, with verification suites for the operator algebra
and the analytic-smoothing diagnostics."""

__version__ = "0.1.0"
