"""Receive-mode lens experiments: phase-ramped excitation, beam-port
coupling vectors, observation-curve profiles, and DoA sweeps.

A DoA experiment drives all array ports with the aerial phase ramp of the
incoming plane wave plus each port's transmission-line delay (the lines are
not part of the 2D domain, so their electrical length is applied as a
source phase), runs the field solver to steady state, and reads the beam
ports' single-frequency phasors.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as C0

from .fdtd import grid as fdtd_grid
from .fdtd import solver as fdtd_solver
from .lens import LensGeometry

TWO_PI = 2.0 * math.pi


class CouplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverSettings:
    """Field-solver knobs shared by all coupling experiments."""

    resolution: float = 20.0
    npml: int = 10
    courant: float = 0.99
    pml_scale: float = 1.0
    # channel modes travel below c_med; allow extra settling beyond the
    # straight-line traversal estimate
    settle_traversals: float = 3.0
    dft_periods: int = 10
    n_steps: int | None = None
    max_cells: float = 4e6


@dataclass
class CouplingVector:
    """Beam-port response of the lens to one direction of arrival."""

    doa: float
    beam_amplitudes: np.ndarray      # complex, max |.| = 1 for solver output
    array_reflections: np.ndarray    # complex, same normalization
    peak_port: int                   # 1-based; ties resolve to lower index
    focus_fraction: float
    spillover_fraction: float
    norm: float = 1.0                # raw amplitude = beam_amplitudes * norm

    @property
    def beam_powers(self) -> np.ndarray:
        return np.abs(self.beam_amplitudes) ** 2


def _metrics(beam_amplitudes: np.ndarray) -> tuple[int, float, float]:
    powers = np.abs(beam_amplitudes) ** 2
    total = float(powers.sum())
    if total <= 0.0:
        return 1, 0.0, 1.0
    peak = int(np.argmax(powers))     # argmax takes the first (lowest) index
    focus = float(powers[peak] / total)
    return peak + 1, focus, 1.0 - focus


def make_vector(doa: float, beam_amplitudes, array_reflections=None,
                normalize: bool = True) -> CouplingVector:
    beam = np.asarray(beam_amplitudes, dtype=complex)
    refl = np.zeros(0, dtype=complex) if array_reflections is None \
        else np.asarray(array_reflections, dtype=complex)
    scale = 1.0
    if normalize:
        norm = float(np.max(np.abs(beam)))
        if norm > 0.0:
            beam = beam / norm
            refl = refl / norm
            scale = norm
    peak, focus, spill = _metrics(beam)
    return CouplingVector(doa=doa, beam_amplitudes=beam,
                          array_reflections=refl, peak_port=peak,
                          focus_fraction=focus, spillover_fraction=spill,
                          norm=scale)


@dataclass
class CouplingTable:
    doa_grid: np.ndarray             # radians, strictly increasing
    vectors: list[CouplingVector]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.doa_grid = np.asarray(self.doa_grid, dtype=float)
        if np.any(np.diff(self.doa_grid) <= 0):
            raise CouplingError("doa grid must be strictly increasing")
        n_beams = {len(v.beam_amplitudes) for v in self.vectors}
        if len(n_beams) > 1:
            raise CouplingError("inconsistent beam counts across table entries")

    @property
    def n_beam(self) -> int:
        return len(self.vectors[0].beam_amplitudes)


# --------------------------------------------------------------------------
# excitation


def phase_ramp(theta: float, geometry: LensGeometry) -> np.ndarray:
    """Unit-magnitude array-port amplitudes for a plane wave from DoA theta.

    Element n gets exp(-j k0 y3_n sin(theta)); realized by the solver as a
    per-port time shift, which reproduces the physical arrival staggering.
    """
    if abs(theta) > math.pi / 2:
        raise ValueError("DoA must lie within +/- pi/2")
    k0 = TWO_PI * geometry.params.freq / C0
    y3 = np.asarray(geometry.aperture_positions)
    return np.exp(-1j * k0 * y3 * math.sin(theta))


def port_excitations(theta: float, geometry: LensGeometry) -> np.ndarray:
    """phase_ramp with each port's feed-line electrical delay applied.

    A longer line delays its port's firing, so the line term carries the
    opposite phase sign to the aerial ramp (phases map to time shifts as
    tau = phase / (2 pi f0)).
    """
    k_med = TWO_PI * geometry.params.freq * math.sqrt(geometry.eps_eff) / C0
    w = np.asarray(geometry.line_lengths)
    return phase_ramp(theta, geometry) * np.exp(1j * k_med * w)


# --------------------------------------------------------------------------
# experiments


def _build_grid(geometry: LensGeometry, settings: SolverSettings):
    return fdtd_grid.rasterize(geometry, settings.resolution,
                               npml=settings.npml,
                               max_cells=settings.max_cells)


def doa_response(theta: float, geometry: LensGeometry,
                 settings: SolverSettings | None = None,
                 material_grid: fdtd_grid.MaterialGrid | None = None,
                 want_fields: bool = False):
    """Drive the array ports for one DoA and collect the beam response.

    Returns a CouplingVector, or (CouplingVector, RunResult) when
    want_fields is set (the run then also accumulates the steady-state
    field-phasor map for snapshots and observation profiles).
    """
    settings = settings or SolverSettings()
    mg = material_grid if material_grid is not None \
        else _build_grid(geometry, settings)
    n_beam = geometry.n_beam
    amps = port_excitations(theta, geometry)
    wf = fdtd_solver.Waveform(kind="cw", carrier=geometry.params.freq)
    sources = [
        fdtd_solver.PortSignal(port_id=n_beam + 1 + k, mode="source",
                               amplitude=complex(amps[k]), waveform=wf)
        for k in range(geometry.n_array)
    ]
    result = fdtd_solver.run(
        mg, sources, n_steps=settings.n_steps,
        settle_traversals=settings.settle_traversals,
        dft_periods=settings.dft_periods, courant=settings.courant,
        pml_scale=settings.pml_scale, phasor_grid=want_fields)

    beam = np.array([result.ez_phasor(p + 1) for p in range(n_beam)])
    refl = np.array([result.wave_split(n_beam + 1 + k)[1]
                     for k in range(geometry.n_array)])
    vec = make_vector(theta, beam, refl)
    if want_fields:
        return vec, result
    return vec


def observation_profile(field: np.ndarray, mg: fdtd_grid.MaterialGrid,
                        geometry: LensGeometry, offset: float = 200e-6,
                        ds: float | None = None):
    """|field| sampled along the beam-side curve, `offset` inside the arc.

    Returns (arc_length, magnitude); arc length runs from the port-1 end of
    the arc to the port-13 end.  `field` is a full-grid scalar map (the
    steady-state phasor map or a snapshot).
    """
    ds = ds or mg.dx
    cx, cy = geometry.arc_center
    radius = geometry.arc_radius - offset
    t_start = math.atan2(geometry.beam_ports[0].position[1] - cy,
                         cx - geometry.beam_ports[0].position[0])
    t_stop = math.atan2(geometry.beam_ports[-1].position[1] - cy,
                        cx - geometry.beam_ports[-1].position[0])
    arc = abs(t_start - t_stop) * radius
    n = max(int(math.ceil(arc / ds)) + 1, 2)
    ts = np.linspace(t_start, t_stop, n)
    xs = cx - radius * np.cos(ts)
    ys = cy + radius * np.sin(ts)
    fi = (xs - mg.x0) / mg.dx
    fj = (ys - mg.y0) / mg.dx
    i0 = np.floor(fi).astype(int)
    j0 = np.floor(fj).astype(int)
    if (i0 < 0).any() or (j0 < 0).any() or (i0 + 1 >= mg.nx).any() \
            or (j0 + 1 >= mg.ny).any():
        raise CouplingError("observation curve leaves the simulation grid")
    wi = fi - i0
    wj = fj - j0
    mag = np.abs(field)
    vals = (mag[i0, j0] * (1 - wi) * (1 - wj)
            + mag[i0 + 1, j0] * wi * (1 - wj)
            + mag[i0, j0 + 1] * (1 - wi) * wj
            + mag[i0 + 1, j0 + 1] * wi * wj)
    s = np.linspace(0.0, arc, n)
    return s, vals


def profile_peaks(s: np.ndarray, vals: np.ndarray,
                  prominence_frac: float = 0.05) -> np.ndarray:
    """Indices of dominant local maxima of an observation profile."""
    from scipy.signal import find_peaks
    peaks, _ = find_peaks(vals, prominence=prominence_frac * float(vals.max()))
    return peaks


# --------------------------------------------------------------------------
# sweeps


def _sweep_worker(args):
    theta, geometry, settings = args
    return theta, doa_response(theta, geometry, settings)


def sweep(doas, geometry: LensGeometry,
          settings: SolverSettings | None = None,
          workers: int = 1) -> CouplingTable:
    """One doa_response per angle; parallel across angles, ordered output."""
    settings = settings or SolverSettings()
    doas = list(doas)
    if not doas:
        raise CouplingError("empty DoA list")
    if any(b <= a for a, b in zip(doas[:-1], doas[1:])):
        raise CouplingError("DoA list must be strictly increasing")

    vectors: list[CouplingVector | None] = [None] * len(doas)
    failures = []
    if workers > 1:
        jobs = [(theta, geometry, settings) for theta in doas]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for k, out in enumerate(pool.map(_sweep_worker, jobs)):
                vectors[k] = out[1]
    else:
        mg = _build_grid(geometry, settings)
        for k, theta in enumerate(doas):
            try:
                vectors[k] = doa_response(theta, geometry, settings, mg)
            except Exception as exc:
                failures.append((theta, exc))
        if failures:
            detail = "; ".join(f"{math.degrees(t):.2f} deg: {e}"
                               for t, e in failures)
            raise CouplingError(f"sweep failed at {detail}")

    meta = {
        "freq_hz": geometry.params.freq,
        "eps_eff": geometry.eps_eff,
        "resolution": settings.resolution,
        "n_beam": geometry.n_beam,
        "n_array": geometry.n_array,
        "normalization": "per-experiment max beam amplitude",
        "beam_angles_deg": [math.degrees(a) for a in geometry.beam_angles],
    }
    return CouplingTable(doa_grid=np.array(doas), vectors=vectors,
                         metadata=meta)


def interpolate(table: CouplingTable, theta: float) -> CouplingVector:
    """Per-port complex linear interpolation between bracketing grid angles."""
    grid = table.doa_grid
    if theta < grid[0] or theta > grid[-1]:
        raise CouplingError(
            f"theta {math.degrees(theta):.3f} deg outside table range "
            f"[{math.degrees(grid[0]):.2f}, {math.degrees(grid[-1]):.2f}]")
    idx = int(np.searchsorted(grid, theta))
    if idx < len(grid) and grid[idx] == theta:
        return table.vectors[idx]
    lo, hi = idx - 1, idx
    t = (theta - grid[lo]) / (grid[hi] - grid[lo])
    va, vb = table.vectors[lo], table.vectors[hi]
    beam = (1.0 - t) * va.beam_amplitudes + t * vb.beam_amplitudes
    if len(va.array_reflections) == len(vb.array_reflections):
        refl = (1.0 - t) * va.array_reflections + t * vb.array_reflections
    else:
        refl = np.zeros(0, dtype=complex)
    # amplitudes stay the exact linear mix; only the metrics are recomputed
    return make_vector(theta, beam, refl, normalize=False)


# --------------------------------------------------------------------------
# CSV round trip


def save_table(table: CouplingTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_deg", "port", "kind", "re", "im"])
        for theta, vec in zip(table.doa_grid, table.vectors):
            deg = math.degrees(theta)
            for p, a in enumerate(vec.beam_amplitudes):
                writer.writerow([f"{deg:.10g}", p + 1, "beam",
                                 f"{a.real:.17g}", f"{a.imag:.17g}"])
            for p, a in enumerate(vec.array_reflections):
                writer.writerow([f"{deg:.10g}", p + 1, "array",
                                 f"{a.real:.17g}", f"{a.imag:.17g}"])
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(table.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_table(path) -> CouplingTable:
    rows: dict[float, dict[str, dict[int, complex]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["theta_deg", "port", "kind", "re", "im"]:
            raise CouplingError(f"unexpected coupling header {header!r}")
        for deg, port, kind, re_s, im_s in reader:
            entry = rows.setdefault(float(deg), {"beam": {}, "array": {}})
            entry[kind][int(port)] = complex(float(re_s), float(im_s))
    try:
        with open(str(path) + ".meta.json") as fh:
            metadata = json.load(fh)
    except OSError:
        metadata = {}
    doas, vectors = [], []
    for deg in sorted(rows):
        entry = rows[deg]
        beam = np.array([entry["beam"][p] for p in sorted(entry["beam"])])
        refl = np.array([entry["array"][p] for p in sorted(entry["array"])]) \
            if entry["array"] else np.zeros(0, dtype=complex)
        doas.append(math.radians(deg))
        vectors.append(make_vector(math.radians(deg), beam, refl,
                                   normalize=False))
    return CouplingTable(doa_grid=np.array(doas), vectors=vectors,
                         metadata=metadata)


def save_vector(vec: CouplingVector, path) -> None:
    table = CouplingTable(doa_grid=np.array([vec.doa]), vectors=[vec],
                          metadata={})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_deg", "port", "kind", "re", "im"])
        deg = math.degrees(vec.doa)
        for p, a in enumerate(vec.beam_amplitudes):
            writer.writerow([f"{deg:.10g}", p + 1, "beam",
                             f"{a.real:.17g}", f"{a.imag:.17g}"])
        for p, a in enumerate(vec.array_reflections):
            writer.writerow([f"{deg:.10g}", p + 1, "array",
                             f"{a.real:.17g}", f"{a.imag:.17g}"])
    meta = {
        "theta_deg": deg,
        "peak_port": vec.peak_port,
        "focus_fraction": vec.focus_fraction,
        "spillover_fraction": vec.spillover_fraction,
    }
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
