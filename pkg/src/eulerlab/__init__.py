"""Numerical laboratory for steady Euler flows on the flat 3-torus.

Subpackages cover four areas: Fourier-spectral fields and curl eigenbases
(`spectral`), trajectory and chaos diagnostics (`dynamics`), the explicit
contact model with its compatible-metric perturbations (`contact`), and the
Galerkin discretization of the curl-type operator on 1-forms together with
eigenvalue-splitting machinery (`galerkin`).  `runner` and `cli` wrap it all
into reproducible batch experiments.
"""

__version__ = "0.1.0"
