"""2D TM finite-difference time-domain solver over a MaterialGrid.

Leapfrog update with convolutional-PML absorbers, soft line sources across
port feed channels, per-face time series (field, tangential H, Poynting
flux), and single-frequency phasor extraction over the settled portion of
the run.  The time step is snapped so one carrier period is an integer
number of steps, which makes integer-period DFT windows exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import mu_0 as MU0

from .backend import BACKEND_NAME, step_fields
from .grid import MaterialGrid

TWO_PI = 2.0 * math.pi
ETA0 = math.sqrt(MU0 / EPS0)


class FdtdError(RuntimeError):
    """Numerical failure inside the time stepper."""


# --------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class Waveform:
    """Shared excitation waveform; per-port phases become time shifts."""

    kind: str                 # "cw" | "gaussian"
    carrier: float
    width: float = 0.0        # gaussian envelope scale (s)
    delay: float = 0.0
    ramp_periods: float = 5.0

    def validate(self) -> None:
        if self.kind not in ("cw", "gaussian"):
            raise ValueError(f"unknown waveform kind {self.kind!r}")
        if not self.carrier > 0:
            raise ValueError("waveform carrier must be positive")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError("gaussian waveform needs a positive width")

    def value(self, t: float) -> float:
        u = t - self.delay
        if self.kind == "cw":
            if u <= 0.0:
                return 0.0
            t_ramp = self.ramp_periods / self.carrier
            env = math.sin(0.5 * math.pi * u / t_ramp) ** 2 if u < t_ramp else 1.0
            return env * math.cos(TWO_PI * self.carrier * u)
        v = u - 4.0 * self.width
        return math.exp(-(v / self.width) ** 2) * math.cos(TWO_PI * self.carrier * v)

    def active_until(self) -> float:
        """Time after which the waveform is (numerically) extinguished."""
        if self.kind == "cw":
            return math.inf
        return self.delay + 9.0 * self.width


def gaussian_pulse(carrier: float, fractional_bandwidth: float = 0.3,
                   delay: float = 0.0) -> Waveform:
    """Gaussian-modulated sinusoid with the given power-FWHM bandwidth."""
    sigma = 2.0 * math.sqrt(math.log(2.0) / 2.0) \
        / (math.pi * fractional_bandwidth * carrier)
    return Waveform(kind="gaussian", carrier=carrier, width=sigma, delay=delay)


@dataclass(frozen=True)
class PortSignal:
    port_id: int
    mode: str                       # "source" | "record"
    amplitude: complex = 1.0 + 0.0j
    waveform: Waveform | None = None

    def validate(self) -> None:
        if self.mode not in ("source", "record"):
            raise ValueError(f"unknown port mode {self.mode!r}")
        if not (math.isfinite(self.amplitude.real)
                and math.isfinite(self.amplitude.imag)):
            raise ValueError("source amplitude must be finite")
        if self.mode == "source":
            if self.waveform is None:
                raise ValueError("source ports need a waveform")
            self.waveform.validate()


@dataclass(frozen=True)
class LineSource:
    """Soft source on explicit grid cells (validation / oracle runs)."""

    cells: tuple
    amplitude: complex = 1.0 + 0.0j
    waveform: Waveform | None = None


@dataclass
class _PreparedSource:
    cells: tuple[np.ndarray, np.ndarray]
    magnitude: float
    waveform: Waveform


def _shift_by_phase(wf: Waveform, amplitude: complex) -> Waveform:
    # complex amplitude realized as a time shift of the shared waveform:
    # tau = phase / (2 pi f0), exact at the carrier
    tau = cmath.phase(amplitude) / (TWO_PI * wf.carrier)
    return Waveform(kind=wf.kind, carrier=wf.carrier, width=wf.width,
                    delay=wf.delay + tau, ramp_periods=wf.ramp_periods)


def _prepare_sources(grid: MaterialGrid, signals) -> list[_PreparedSource]:
    out = []
    for sig in signals:
        if isinstance(sig, LineSource):
            if sig.waveform is None:
                raise ValueError("LineSource needs a waveform")
            ii = np.atleast_1d(np.asarray(sig.cells[0], dtype=np.intp))
            jj = np.atleast_1d(np.asarray(sig.cells[1], dtype=np.intp))
            out.append(_PreparedSource(
                cells=(ii, jj), magnitude=abs(sig.amplitude),
                waveform=_shift_by_phase(sig.waveform, sig.amplitude)))
            continue
        sig.validate()
        if sig.mode != "source":
            continue
        if sig.port_id not in grid.port_faces:
            raise ValueError(f"unknown port id {sig.port_id}")
        out.append(_PreparedSource(
            cells=grid.port_faces[sig.port_id].inject_cells,
            magnitude=abs(sig.amplitude),
            waveform=_shift_by_phase(sig.waveform, sig.amplitude)))
    return out


# --------------------------------------------------------------------------
# state


@dataclass
class FdtdState:
    """Field grids plus the per-grid update coefficients and PML memory."""

    Ez: np.ndarray
    Hx: np.ndarray
    Hy: np.ndarray
    psi_hxy: np.ndarray
    psi_hyx: np.ndarray
    psi_ezx: np.ndarray
    psi_ezy: np.ndarray
    ca: np.ndarray
    cb: np.ndarray
    bh_y: np.ndarray
    ch_y: np.ndarray
    bh_x: np.ndarray
    ch_x: np.ndarray
    be_x: np.ndarray
    ce_x: np.ndarray
    be_y: np.ndarray
    ce_y: np.ndarray
    coef_h: float
    dt: float
    steps_per_period: int
    t_index: int = 0
    probe_accumulators: dict = field(default_factory=dict)


def _cpml_vectors(n: int, half: bool, npml: int, dt: float, dx: float,
                  eps_eff: float, pml_scale: float, order: int = 3):
    """Decay/accumulation coefficient vectors along one axis."""
    count = n - 1 if half else n
    pos = np.arange(count) + (0.5 if half else 0.0)
    sigma_max = pml_scale * 0.8 * (order + 1) / (ETA0 * dx * math.sqrt(eps_eff))
    depth_lo = (npml - pos) / npml
    depth_hi = (pos - (n - 1 - npml)) / npml
    depth = np.maximum(np.maximum(depth_lo, depth_hi), 0.0)
    sigma = sigma_max * depth ** order
    b = np.exp(-sigma * dt / EPS0)
    c = np.where(sigma > 0.0, b - 1.0, 0.0)
    return np.ascontiguousarray(b), np.ascontiguousarray(c)


def make_state(grid: MaterialGrid, courant: float = 0.99,
               pml_scale: float = 1.0) -> FdtdState:
    """Allocate fields and precompute update coefficients for a grid."""
    if not 0 < courant <= 1:
        raise ValueError("courant factor must lie in (0, 1]")
    c_med = grid.c_medium
    dt_max = courant * grid.dx / (c_med * math.sqrt(2.0))
    spp = max(int(math.ceil(1.0 / (grid.freq * dt_max))), 4)
    dt = 1.0 / (grid.freq * spp)
    assert dt <= grid.dx / (c_med * math.sqrt(2.0)) + 1e-30

    nx, ny = grid.nx, grid.ny
    eps = EPS0 * grid.eps_eff
    loss = grid.sigma * dt / (2.0 * eps)
    ca_val = (1.0 - loss) / (1.0 + loss)
    cb_val = (dt / (eps * grid.dx)) / (1.0 + loss)
    ca = np.full((nx, ny), ca_val)
    cb = np.full((nx, ny), cb_val)
    ca[grid.conductor] = 0.0
    cb[grid.conductor] = 0.0

    bh_x, ch_x = _cpml_vectors(nx, True, grid.npml, dt, grid.dx,
                               grid.eps_eff, pml_scale)
    bh_y, ch_y = _cpml_vectors(ny, True, grid.npml, dt, grid.dx,
                               grid.eps_eff, pml_scale)
    be_x, ce_x = _cpml_vectors(nx, False, grid.npml, dt, grid.dx,
                               grid.eps_eff, pml_scale)
    be_y, ce_y = _cpml_vectors(ny, False, grid.npml, dt, grid.dx,
                               grid.eps_eff, pml_scale)

    return FdtdState(
        Ez=np.zeros((nx, ny)), Hx=np.zeros((nx, ny - 1)),
        Hy=np.zeros((nx - 1, ny)),
        psi_hxy=np.zeros((nx, ny - 1)), psi_hyx=np.zeros((nx - 1, ny)),
        psi_ezx=np.zeros((nx, ny)), psi_ezy=np.zeros((nx, ny)),
        ca=ca, cb=cb, bh_y=bh_y, ch_y=ch_y, bh_x=bh_x, ch_x=ch_x,
        be_x=be_x, ce_x=ce_x, be_y=be_y, ce_y=ce_y,
        coef_h=dt / (MU0 * grid.dx), dt=dt, steps_per_period=spp)


def step(state: FdtdState, grid: MaterialGrid, sources=()) -> FdtdState:
    """One leapfrog step (H half-step, then E) plus soft-source injection."""
    if sources and not isinstance(sources[0], _PreparedSource):
        sources = _prepare_sources(grid, sources)
    step_fields(state.Ez, state.Hx, state.Hy,
                state.psi_hxy, state.psi_hyx, state.psi_ezx, state.psi_ezy,
                state.ca, state.cb, state.bh_y, state.ch_y,
                state.bh_x, state.ch_x, state.be_x, state.ce_x,
                state.be_y, state.ce_y, state.coef_h)
    t = (state.t_index + 1) * state.dt
    for src in sources:
        val = src.magnitude * src.waveform.value(t)
        if val != 0.0:
            state.Ez[src.cells] += val
    state.t_index += 1
    return state


# --------------------------------------------------------------------------
# phasor extraction


def dft_phasor(series: np.ndarray, f0: float, dt: float,
               start: int, stop: int) -> complex:
    """Single-frequency phasor; A*cos(2 pi f0 t + phi) -> A*exp(j phi).

    The window [start, stop) must cover at least 5 carrier periods.
    """
    series = np.asarray(series)
    if not 0 <= start < stop <= len(series):
        raise ValueError(f"window [{start}, {stop}) outside series")
    n_win = stop - start
    if n_win * dt * f0 < 5.0 - 1e-9:
        raise ValueError("DFT window shorter than 5 carrier periods")
    n = np.arange(start, stop)
    kernel = np.exp(-1j * TWO_PI * f0 * dt * n)
    return complex(2.0 / n_win * np.dot(series[start:stop], kernel))


# --------------------------------------------------------------------------
# full runs


@dataclass
class FaceRecord:
    ez_rec: np.ndarray      # face-average Ez at the record line
    ht_rec: np.ndarray      # face-average tangential H at the record line
    flux_rec: np.ndarray    # Poynting flux through the record line (W/m)
    ez_inj: np.ndarray      # face-average Ez at the injection line


@dataclass
class RunResult:
    grid: MaterialGrid
    dt: float
    n_steps: int
    window: tuple[int, int]
    f0: float
    ports: dict[int, FaceRecord]
    flux: dict[str, np.ndarray]
    probes: list[np.ndarray]
    energy: np.ndarray | None = None          # (k, 2): step, total energy
    dissipated: float = 0.0                   # J/m inside the plate region
    ez_final: np.ndarray | None = None
    ez_phasor_grid: np.ndarray | None = None
    backend: str = BACKEND_NAME

    def ez_phasor(self, port_id: int, line: str = "rec") -> complex:
        rec = self.ports[port_id]
        series = rec.ez_rec if line == "rec" else rec.ez_inj
        return dft_phasor(series, self.f0, self.dt, *self.window)

    def wave_split(self, port_id: int) -> tuple[complex, complex]:
        """(incoming, outgoing) wave amplitudes at the record line.

        Incoming travels along the face normal (into the lens).  The H
        series lags E by half a step; the phasor is re-timed before the
        split.  Conductor-walled channels carry the first waveguide mode,
        so the split uses that mode's wave impedance for the face width.
        """
        rec = self.ports[port_id]
        ez = dft_phasor(rec.ez_rec, self.f0, self.dt, *self.window)
        ht = dft_phasor(rec.ht_rec, self.f0, self.dt, *self.window)
        ht *= cmath.exp(1j * math.pi * self.f0 * self.dt)
        eta = self.port_impedance(port_id)
        fw = (ez - eta * ht) / 2.0
        bw = (ez + eta * ht) / 2.0
        return fw, bw

    def port_impedance(self, port_id: int) -> float:
        eta = ETA0 / math.sqrt(self.grid.eps_eff)
        lam = self.grid.lam_g
        width = self.grid.port_faces[port_id].width
        ratio = lam / (2.0 * width)
        if ratio >= 1.0:
            return eta
        return eta / math.sqrt(1.0 - ratio * ratio)

    def net_power(self, port_id: int) -> float:
        """Cycle-mean power through the record line, positive into the lens."""
        rec = self.ports[port_id]
        a, b = self.window
        return float(-np.mean(rec.flux_rec[a:b]) * self.grid.dx)

    def flux_power(self, name: str) -> float:
        a, b = self.window
        return float(-np.mean(self.flux[name][a:b]) * self.grid.dx)


def _face_series_init(n_steps):
    return FaceRecord(ez_rec=np.zeros(n_steps), ht_rec=np.zeros(n_steps),
                      flux_rec=np.zeros(n_steps), ez_inj=np.zeros(n_steps))


def _face_samples(state: FdtdState, ii, jj, normal):
    """(avg Ez, avg tangential H, summed Ez*Ht) over one face line."""
    Ez, Hx, Hy = state.Ez, state.Hx, state.Hy
    ez = Ez[ii, jj]
    hx_co = 0.5 * (Hx[ii, jj - 1] + Hx[ii, jj])
    hy_co = 0.5 * (Hy[ii - 1, jj] + Hy[ii, jj])
    tx, ty = -normal[1], normal[0]
    ht = hx_co * tx + hy_co * ty
    n = len(ez)
    return float(np.sum(ez)) / n, float(np.sum(ht)) / n, float(np.dot(ez, ht))


def default_step_count(grid: MaterialGrid, state: FdtdState,
                       settle_traversals: float = 2.0,
                       dft_periods: int = 10) -> int:
    t_trav = grid.traversal_time()
    settle = int(math.ceil(settle_traversals * t_trav / state.dt))
    n = settle + (dft_periods + 1) * state.steps_per_period
    floor_steps = int(math.ceil(3.0 * t_trav / state.dt)) + 1
    return max(n, floor_steps)


def run(grid: MaterialGrid, sources, n_steps: int | None = None,
        probes=(), settle_traversals: float = 2.0, dft_periods: int = 10,
        courant: float = 0.99, pml_scale: float = 1.0,
        collect_energy_every: int = 0, collect_dissipation: bool = False,
        phasor_grid: bool = False, keep_final_field: bool = False,
        check_every: int = 100) -> RunResult:
    """Run a simulation to completion and return per-face records + phasors."""
    state = make_state(grid, courant=courant, pml_scale=pml_scale)
    prepared = _prepare_sources(grid, sources)
    f0 = grid.freq

    if n_steps is None:
        n_steps = default_step_count(grid, state, settle_traversals, dft_periods)
    t_trav = grid.traversal_time()
    if n_steps * state.dt < 3.0 * t_trav:
        raise ValueError(
            f"n_steps={n_steps} covers {n_steps * state.dt / t_trav:.2f} "
            "traversal times; need at least 3")

    spp = state.steps_per_period
    settle = int(math.ceil(settle_traversals * t_trav / state.dt))
    n_periods = min(dft_periods, (n_steps - settle) // spp)
    if n_periods < 5:
        raise ValueError("run too short for a 5-period DFT window after settling")
    window = (n_steps - n_periods * spp, n_steps)

    port_rec = {pid: _face_series_init(n_steps) for pid in grid.port_faces}
    flux_rec = {f.name: np.zeros(n_steps) for f in grid.flux_faces}
    probe_series = [np.zeros(n_steps) for _ in probes]

    energy_rows = []
    dv = grid.dx * grid.dx
    eps = EPS0 * grid.eps_eff
    dissipated = 0.0
    diss_mask = grid.interior if grid.interior is not None else ~grid.conductor

    ezc = np.zeros_like(state.Ez) if phasor_grid else None
    ezs = np.zeros_like(state.Ez) if phasor_grid else None

    for n in range(n_steps):
        step(state, grid, prepared)

        for pid, face in grid.port_faces.items():
            rec = port_rec[pid]
            ez, ht, fx = _face_samples(state, *face.cells, face.normal)
            rec.ez_rec[n] = ez
            rec.ht_rec[n] = ht
            rec.flux_rec[n] = fx
            ii, jj = face.inject_cells
            rec.ez_inj[n] = float(np.sum(state.Ez[ii, jj])) / len(ii)
        for face in grid.flux_faces:
            _, _, fx = _face_samples(state, *face.cells, face.normal)
            flux_rec[face.name][n] = fx
        for k, (pi, pj) in enumerate(probes):
            probe_series[k][n] = state.Ez[pi, pj]

        if collect_dissipation:
            dissipated += grid.sigma * float(
                np.sum(state.Ez[diss_mask] ** 2)) * dv * state.dt
        if collect_energy_every and n % collect_energy_every == 0:
            e_tot = 0.5 * eps * float(np.sum(state.Ez ** 2)) * dv \
                + 0.5 * MU0 * (float(np.sum(state.Hx ** 2))
                               + float(np.sum(state.Hy ** 2))) * dv
            energy_rows.append((n, e_tot))
        if phasor_grid and window[0] <= n < window[1]:
            wt = TWO_PI * f0 * state.dt * n
            ezc += state.Ez * math.cos(wt)
            ezs += state.Ez * math.sin(wt)

        if check_every and (n + 1) % check_every == 0:
            if not np.isfinite(state.Ez).all():
                raise FdtdError(f"non-finite field at step {n + 1}")

    grid_phasor = None
    if phasor_grid:
        n_win = window[1] - window[0]
        grid_phasor = (2.0 / n_win) * (ezc - 1j * ezs)

    return RunResult(
        grid=grid, dt=state.dt, n_steps=n_steps, window=window, f0=f0,
        ports=port_rec, flux=flux_rec, probes=probe_series,
        energy=np.array(energy_rows) if energy_rows else None,
        dissipated=dissipated,
        ez_final=state.Ez.copy() if keep_final_field else None,
        ez_phasor_grid=grid_phasor)


def total_energy(state: FdtdState, grid: MaterialGrid) -> float:
    dv = grid.dx * grid.dx
    eps = EPS0 * grid.eps_eff
    return 0.5 * eps * float(np.sum(state.Ez ** 2)) * dv \
        + 0.5 * MU0 * (float(np.sum(state.Hx ** 2))
                       + float(np.sum(state.Hy ** 2))) * dv
