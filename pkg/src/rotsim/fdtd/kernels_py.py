"""Pure-NumPy field update kernel (fallback backend).

One leapfrog step for the 2D TM set (Ez, Hx, Hy) with convolutional-PML
memory variables.  The compiled backend implements exactly the same
arithmetic, expression tree included, so the two produce bit-identical
fields; keep any change here in sync with _kernels.pyx.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def step_fields(Ez, Hx, Hy, psi_hxy, psi_hyx, psi_ezx, psi_ezy,
                ca, cb, bh_y, ch_y, bh_x, ch_x, be_x, ce_x, be_y, ce_y,
                coef_h) -> None:
    """Advance H by a half-step followed by E; arrays modified in place.

    Ez is (nx, ny) at integer cell centers, Hx is (nx, ny-1) at (i, j+1/2),
    Hy is (nx-1, ny) at (i+1/2, j).  CPML memory decays with the b vectors
    and accumulates the c-weighted undivided differences; outside the
    absorber b=1, c=0 keeps the memory identically zero.  Grid-edge Ez rows
    and columns are never updated (PEC backing).
    """
    # H update
    dE = Ez[:, 1:] - Ez[:, :-1]
    psi_hxy[:, :] = bh_y * psi_hxy + ch_y * dE
    Hx -= coef_h * (dE + psi_hxy)

    dE = Ez[1:, :] - Ez[:-1, :]
    psi_hyx[:, :] = bh_x[:, None] * psi_hyx + ch_x[:, None] * dE
    Hy += coef_h * (dE + psi_hyx)

    # E update (interior only)
    dHy = Hy[1:, 1:-1] - Hy[:-1, 1:-1]
    dHx = Hx[1:-1, 1:] - Hx[1:-1, :-1]
    psi_ezx[1:-1, 1:-1] = be_x[1:-1, None] * psi_ezx[1:-1, 1:-1] \
        + ce_x[1:-1, None] * dHy
    psi_ezy[1:-1, 1:-1] = be_y[1:-1] * psi_ezy[1:-1, 1:-1] + ce_y[1:-1] * dHx
    Ez[1:-1, 1:-1] = ca[1:-1, 1:-1] * Ez[1:-1, 1:-1] + cb[1:-1, 1:-1] * (
        (dHy - dHx) + (psi_ezx[1:-1, 1:-1] - psi_ezy[1:-1, 1:-1]))
