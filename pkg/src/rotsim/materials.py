"""Microstrip substrate helpers: effective permittivity, loss, wavelengths.

The lens and the 2D field solver both collapse the microstrip cross-section
into a single scalar effective permittivity.  The quasi-static Hammerstad
formula evaluated at the 50-ohm trace width is used unless the caller
overrides the value explicitly.
"""

from __future__ import annotations

import math

from scipy.constants import c as C0
from scipy.constants import epsilon_0 as EPS0

TWO_PI = 2.0 * math.pi


def microstrip_width_50ohm(eps_r: float, substrate_h: float) -> float:
    """Wheeler synthesis of the trace width for a 50-ohm microstrip line."""
    if eps_r < 1.0 or substrate_h <= 0.0:
        raise ValueError("need eps_r >= 1 and substrate_h > 0")
    z0 = 50.0
    a = (z0 / 60.0) * math.sqrt((eps_r + 1.0) / 2.0) + \
        (eps_r - 1.0) / (eps_r + 1.0) * (0.23 + 0.11 / eps_r)
    ratio = 8.0 * math.exp(a) / (math.exp(2.0 * a) - 2.0)
    if ratio > 2.0:
        b = 377.0 * math.pi / (2.0 * z0 * math.sqrt(eps_r))
        ratio = (2.0 / math.pi) * (b - 1.0 - math.log(2.0 * b - 1.0)
                                   + (eps_r - 1.0) / (2.0 * eps_r)
                                   * (math.log(b - 1.0) + 0.39 - 0.61 / eps_r))
    return ratio * substrate_h


def effective_permittivity(eps_r: float, substrate_h: float,
                           trace_width: float | None = None) -> float:
    """Quasi-static microstrip effective permittivity.

    eps_eff = (eps_r+1)/2 + (eps_r-1)/2 * (1 + 12 h/W)^(-1/2), evaluated at
    the 50-ohm width when no trace width is given.
    """
    if trace_width is None:
        trace_width = microstrip_width_50ohm(eps_r, substrate_h)
    if trace_width <= 0.0:
        raise ValueError("trace width must be positive")
    return (eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 \
        * (1.0 + 12.0 * substrate_h / trace_width) ** -0.5


def free_space_wavelength(freq: float) -> float:
    return C0 / freq


def guided_wavelength(freq: float, eps_eff: float) -> float:
    return C0 / (freq * math.sqrt(eps_eff))


def effective_conductivity(freq: float, eps_eff: float, tan_delta: float) -> float:
    """Uniform bulk conductivity equivalent to the substrate loss tangent."""
    return TWO_PI * freq * EPS0 * eps_eff * tan_delta
