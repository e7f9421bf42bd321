"""Rasterization of a lens geometry onto the FDTD material grid.

The plate region, tapers, and port feed channels are drawn as 1-cell
conductor traces on the Ez lattice (supercover line rasterization, so
slanted walls stay watertight).  Port feed channels run from each taper tip
straight into the outer absorber, which terminates every port in a matched
load; dummy wall segments are simply left open, so their energy drains into
the same absorber ("PML-backed" faces).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0

from .. import materials
from ..lens import LensGeometry


class GridError(ValueError):
    """Grid construction failure (size guard, bad members)."""


@dataclass
class PortFace:
    """Oriented sampling line across a port feed channel.

    `normal` points into the lens; `cells` are (i, j) index arrays on the Ez
    lattice.  `inject_cells` sit farther out in the channel than `cells` so
    recorded backward waves contain only what returns from the lens.
    """

    port_id: int
    kind: str                 # "beam" | "array"
    index: int                # 1-based within its kind
    cells: tuple[np.ndarray, np.ndarray]
    inject_cells: tuple[np.ndarray, np.ndarray]
    normal: tuple[float, float]
    width: float              # physical face length (m)


@dataclass
class FluxFace:
    """Record-only oriented line (dummy openings)."""

    name: str
    cells: tuple[np.ndarray, np.ndarray]
    normal: tuple[float, float]
    width: float


@dataclass
class MaterialGrid:
    nx: int
    ny: int
    dx: float
    x0: float                 # x of cell center (0, j)
    y0: float                 # y of cell center (i, 0)
    eps_eff: float
    sigma: float              # bulk substrate conductivity (S/m)
    freq: float
    npml: int
    conductor: np.ndarray     # (nx, ny) bool
    port_faces: dict[int, PortFace] = field(default_factory=dict)
    flux_faces: list[FluxFace] = field(default_factory=list)
    interior: np.ndarray | None = None   # plate-region mask

    @property
    def lam_g(self) -> float:
        return materials.guided_wavelength(self.freq, self.eps_eff)

    @property
    def c_medium(self) -> float:
        return C0 / math.sqrt(self.eps_eff)

    def cell_index(self, x: float, y: float) -> tuple[int, int]:
        return (int(round((x - self.x0) / self.dx)),
                int(round((y - self.y0) / self.dx)))

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return (self.x0 + i * self.dx, self.y0 + j * self.dx)

    def traversal_time(self) -> float:
        diag = math.hypot(self.nx * self.dx, self.ny * self.dx)
        return diag / self.c_medium


# --------------------------------------------------------------------------
# rasterization primitives


def supercover_cells(x0, y0, x1, y1, grid: MaterialGrid):
    """All cells a segment passes through (4-connected; no diagonal gaps)."""
    i0f = (x0 - grid.x0) / grid.dx
    j0f = (y0 - grid.y0) / grid.dx
    i1f = (x1 - grid.x0) / grid.dx
    j1f = (y1 - grid.y0) / grid.dx
    n = int(math.ceil(max(abs(i1f - i0f), abs(j1f - j0f)) * 4)) + 1
    ts = np.linspace(0.0, 1.0, n)
    ii = np.rint(i0f + (i1f - i0f) * ts).astype(np.intp)
    jj = np.rint(j0f + (j1f - j0f) * ts).astype(np.intp)
    cells = [(int(ii[0]), int(jj[0]))]
    for k in range(1, n):
        ci, cj = cells[-1]
        ni, nj = int(ii[k]), int(jj[k])
        if ni == ci and nj == cj:
            continue
        if ni != ci and nj != cj:
            # bridge the diagonal step on both sides: watertight and
            # independent of traversal direction (mirror-symmetric walls)
            cells.append((ni, cj))
            cells.append((ci, nj))
        cells.append((ni, nj))
    ins = [(i, j) for i, j in cells if 0 <= i < grid.nx and 0 <= j < grid.ny]
    if not ins:
        return np.empty(0, np.intp), np.empty(0, np.intp)
    arr = np.array(ins, dtype=np.intp)
    return arr[:, 0], arr[:, 1]


def draw_polyline(points, grid: MaterialGrid) -> None:
    for (xa, ya), (xb, yb) in zip(points[:-1], points[1:]):
        ii, jj = supercover_cells(xa, ya, xb, yb, grid)
        grid.conductor[ii, jj] = True


def polygon_mask(points, grid: MaterialGrid) -> np.ndarray:
    """Even-odd interior mask of a closed polygon on cell centers."""
    mask = np.zeros((grid.nx, grid.ny), dtype=bool)
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        return mask
    xs = grid.x0 + np.arange(grid.nx) * grid.dx
    for j in range(grid.ny):
        y = grid.y0 + j * grid.dx
        xa, ya = pts[:-1, 0], pts[:-1, 1]
        xb, yb = pts[1:, 0], pts[1:, 1]
        hit = (ya <= y) != (yb <= y)
        if not hit.any():
            continue
        xc = xa[hit] + (y - ya[hit]) * (xb[hit] - xa[hit]) / (yb[hit] - ya[hit])
        inside = (np.sort(xc)[None, :] <= xs[:, None]).sum(axis=1) % 2 == 1
        mask[:, j] = inside
    return mask


# --------------------------------------------------------------------------
# grid construction


def uniform_grid(nx: int, ny: int, resolution: float, freq: float,
                 eps_eff: float, tan_delta: float = 0.0, npml: int = 10,
                 max_cells: float = 4e6) -> MaterialGrid:
    """Homogeneous dielectric grid with the absorbing ring; no conductors."""
    if resolution < 10:
        raise GridError("resolution must be >= 10 cells per guided wavelength")
    if nx * ny > max_cells:
        raise GridError(f"grid {nx}x{ny} exceeds max cell count {max_cells:g}")
    dx = materials.guided_wavelength(freq, eps_eff) / resolution
    sigma = materials.effective_conductivity(freq, eps_eff, tan_delta)
    return MaterialGrid(
        nx=nx, ny=ny, dx=dx, x0=-(nx - 1) / 2 * dx, y0=-(ny - 1) / 2 * dx,
        eps_eff=eps_eff, sigma=sigma, freq=freq, npml=npml,
        conductor=np.zeros((nx, ny), dtype=bool))


def rasterize(geometry: LensGeometry, resolution: float, npml: int = 10,
              margin_cells: int = 6, max_cells: float = 4e6,
              face_offset_cells: int = 2, face_gap_cells: int = 8
              ) -> MaterialGrid:
    """Material grid for a synthesized lens.

    resolution is in cells per guided wavelength; the port record line sits
    `face_offset_cells` beyond each taper tip and the injection line a
    further `face_gap_cells` out along the feed channel.
    """
    if resolution < 10:
        raise GridError("resolution must be >= 10 cells per guided wavelength")
    params = geometry.params
    eps_eff = geometry.eps_eff
    lam_g = materials.guided_wavelength(params.freq, eps_eff)
    dx = lam_g / resolution

    channel = (face_offset_cells + face_gap_cells + 6) * dx

    # extent of everything that must live inside the absorber ring
    xs, ys = [], []
    for poly in geometry.port_segments + [geometry.outline]:
        for x, y in poly:
            xs.append(x)
            ys.append(y)
    axes = geometry.beam_taper_axes + geometry.array_taper_axes
    for poly, (ax, ay) in zip(geometry.port_segments, axes):
        tipx = (poly[1][0] + poly[2][0]) / 2.0
        tipy = (poly[1][1] + poly[2][1]) / 2.0
        xs.append(tipx + ax * channel)
        ys.append(tipy + ay * channel)

    pad = (margin_cells + npml) * dx
    xmin, xmax = min(xs) - pad, max(xs) + pad
    yabs = max(abs(min(ys)), abs(max(ys))) + pad
    i0 = math.floor(xmin / dx)
    nx = int(math.ceil(xmax / dx)) - i0 + 1
    half_j = int(math.ceil(yabs / dx))
    ny = 2 * half_j + 1          # symmetric about y=0, center row on axis
    if nx * ny > max_cells:
        raise GridError(f"grid {nx}x{ny} exceeds max cell count {max_cells:g}")

    grid = MaterialGrid(
        nx=nx, ny=ny, dx=dx, x0=i0 * dx, y0=-half_j * dx,
        eps_eff=eps_eff,
        sigma=materials.effective_conductivity(params.freq, eps_eff,
                                               params.tan_delta),
        freq=params.freq, npml=npml,
        conductor=np.zeros((nx, ny), dtype=bool))

    # conductor walls: wedges between mouths, taper sides, feed channels
    for line in geometry.wall_polylines:
        draw_polyline(line, grid)
    for poly, (ax, ay) in zip(geometry.port_segments, axes):
        far = 2.0 * max(nx, ny) * dx
        for corner_mouth, corner_tip in ((poly[0], poly[1]), (poly[3], poly[2])):
            draw_polyline([corner_mouth, corner_tip], grid)
            end = (corner_tip[0] + ax * far, corner_tip[1] + ay * far)
            draw_polyline([corner_tip, end], grid)

    # port faces inside the feed channels
    n_beam = geometry.n_beam
    for k, (poly, (ax, ay)) in enumerate(zip(geometry.port_segments, axes)):
        tipx = (poly[1][0] + poly[2][0]) / 2.0
        tipy = (poly[1][1] + poly[2][1]) / 2.0
        width = math.dist(poly[1], poly[2])
        rec = _channel_face(grid, tipx, tipy, ax, ay,
                            face_offset_cells * dx, width)
        inj = _channel_face(grid, tipx, tipy, ax, ay,
                            (face_offset_cells + face_gap_cells) * dx, width)
        if len(rec[0]) == 0 or len(inj[0]) == 0:
            raise GridError(f"port {k + 1}: empty feed-channel face")
        kind = "beam" if k < n_beam else "array"
        index = k + 1 if kind == "beam" else k + 1 - n_beam
        grid.port_faces[k + 1] = PortFace(
            port_id=k + 1, kind=kind, index=index, cells=rec,
            inject_cells=inj, normal=(-ax, -ay), width=width)

    for m, (a, b) in enumerate(geometry.dummy_segments):
        ii, jj = supercover_cells(a[0], a[1], b[0], b[1], grid)
        keep = ~grid.conductor[ii, jj]
        tx, ty = b[0] - a[0], b[1] - a[1]
        norm = math.hypot(tx, ty)
        nxv, nyv = ty / norm, -tx / norm
        # orient outward (away from the contour origin region)
        cxm, cym = (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0
        if nxv * cxm + nyv * cym < 0:
            nxv, nyv = -nxv, -nyv
        grid.flux_faces.append(FluxFace(
            name=f"dummy{m + 1}", cells=(ii[keep], jj[keep]),
            normal=(nxv, nyv), width=norm))

    grid.interior = polygon_mask(geometry.outline, grid)
    return grid


def _channel_face(grid: MaterialGrid, tipx, tipy, ax, ay, dist, width):
    """Cells of a cross-channel segment `dist` out from the taper tip."""
    cx, cy = tipx + ax * dist, tipy + ay * dist
    tx, ty = -ay, ax
    half = max(width / 2.0 - 0.6 * grid.dx, 0.4 * grid.dx)
    ii, jj = supercover_cells(cx - tx * half, cy - ty * half,
                              cx + tx * half, cy + ty * half, grid)
    if len(ii) == 0:
        return ii, jj
    keep = ~grid.conductor[ii, jj]
    ii, jj = ii[keep], jj[keep]
    seen = set()
    out = []
    for i, j in zip(ii, jj):
        if (int(i), int(j)) not in seen:
            seen.add((int(i), int(j)))
            out.append((int(i), int(j)))
    arr = np.array(out, dtype=np.intp)
    return arr[:, 0], arr[:, 1]
