"""2D TM FDTD engine: material grids, time stepping, phasor extraction."""

from .backend import BACKEND_NAME, available_backends
from .grid import GridError, MaterialGrid, PortFace, rasterize, uniform_grid
from .solver import (FdtdError, FdtdState, LineSource, PortSignal, RunResult,
                     Waveform, dft_phasor, gaussian_pulse, make_state, run,
                     step, total_energy)

__all__ = [
    "BACKEND_NAME", "available_backends", "GridError", "MaterialGrid",
    "PortFace", "rasterize", "uniform_grid", "FdtdError", "FdtdState",
    "LineSource", "PortSignal", "RunResult", "Waveform", "dft_phasor",
    "gaussian_pulse", "make_state", "run", "step", "total_energy",
]
