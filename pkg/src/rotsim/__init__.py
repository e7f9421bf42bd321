"""rotsim: Rotman lens synthesis, 2D FDTD port coupling, beamspace uplink MC."""

__version__ = "0.1.0"
