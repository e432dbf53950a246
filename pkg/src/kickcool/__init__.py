"""Delta-kick cooling and 1D tunneling simulations for ultracold Rb clouds."""

__version__ = "0.1.0"
