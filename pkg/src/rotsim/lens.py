"""Tri-focal Rotman lens synthesis.

Coordinate frame: the lens axis is the x axis, the array-contour reference
point is the origin, and the beam side sits at negative x.  The three design
focal points are

    F0 = (-f1, 0)                       steering angle 0
    F+ = (-f2 cos(alpha), +f2 sin(alpha))   steering angle +theta_max
    F- = (-f2 cos(alpha), -f2 sin(alpha))   steering angle -theta_max

with f2 = beta * f1.  Equal electrical path length from each focal point,
through the plate region, a transmission line of length w, and the aerial
projection of the radiating aperture, pins the inner contour and the line
lengths in closed form (a quadratic in w per aperture position).

Line lengths are reported relative to the on-axis element (w0 = 0); the
common absolute offset cancels in every path difference.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import materials


class LensError(ValueError):
    """Invalid design parameters or an infeasible synthesis."""


# --------------------------------------------------------------------------
# parameter and geometry containers


@dataclass(frozen=True)
class LensDesignParams:
    """Scalar design inputs. Lengths in meters, angles in radians."""

    f1: float
    beta: float = 0.9
    alpha: float = math.radians(30.0)
    phi_max: float = math.radians(30.0)
    theta_max: float = math.radians(50.0)
    n_beam: int = 13
    n_array: int = 13
    n_dummy: int = 2
    taper_len: float = 0.0
    freq: float = 28e9
    eps_r: float = 6.15
    tan_delta: float = 0.0038
    substrate_h: float = 0.64e-3
    element_spacing: float = 0.0
    eps_eff_override: float | None = None  # config override of the microstrip rule
    line_width: float | None = None        # port feed-line width for the 2D model
    port_fill: float = 0.85                # port mouth fraction of the port pitch

    def validate(self) -> None:
        if not self.f1 > 0:
            raise LensError("f1 must be positive")
        if not 0 < self.beta <= 1:
            raise LensError("beta must lie in (0, 1]")
        for name in ("alpha", "phi_max"):
            v = getattr(self, name)
            if not 0 < v < math.pi / 2:
                raise LensError(f"{name} must lie in (0, pi/2)")
        if not 0 < self.theta_max < math.pi / 2:
            raise LensError("theta_max must lie in (0, pi/2)")
        if self.n_beam < 1 or self.n_array < 1:
            raise LensError("n_beam and n_array must be >= 1")
        if self.n_dummy < 0:
            raise LensError("n_dummy must be >= 0")
        if self.eps_r < 1:
            raise LensError("eps_r must be >= 1")
        if self.tan_delta < 0:
            raise LensError("tan_delta must be >= 0")
        if not self.substrate_h > 0:
            raise LensError("substrate_h must be positive")
        if not self.spacing > 0:
            raise LensError("element_spacing must be positive")
        if not 0 < self.port_fill < 1:
            raise LensError("port_fill must lie in (0, 1)")

    @property
    def eps_eff(self) -> float:
        if self.eps_eff_override is not None:
            return self.eps_eff_override
        return materials.effective_permittivity(self.eps_r, self.substrate_h)

    @property
    def spacing(self) -> float:
        """Element pitch; free-space half wavelength unless set explicitly."""
        if self.element_spacing > 0:
            return self.element_spacing
        return materials.free_space_wavelength(self.freq) / 2.0

    @property
    def trace_width(self) -> float:
        """Port feed-line width for the 2D model.

        With out-of-plane E and conductor walls a channel only propagates
        above the half-wavelength cutoff, so the feed lines default to 0.6
        guided wavelengths (still narrower than the port mouths).
        """
        if self.line_width is not None:
            return self.line_width
        return 0.6 * materials.guided_wavelength(self.freq, self.eps_eff)


@dataclass(frozen=True)
class BeamPort:
    position: tuple[float, float]
    subtended_angle: float   # arc parameter, same sign convention as beam_angle
    beam_angle: float        # design steering angle of this port


@dataclass
class LensGeometry:
    """Full synthesized lens: ports, contour, lines, walls, outline."""

    params: LensDesignParams
    eps_eff: float
    beam_ports: list[BeamPort]
    array_contour: list[tuple[float, float]]
    line_lengths: list[float]
    aperture_positions: list[float]
    dummy_segments: list[tuple[tuple[float, float], tuple[float, float]]]
    port_segments: list[list[tuple[float, float]]]  # taper outline per port, beams then array
    outline: list[tuple[float, float]]              # closed polygon of the plate region
    wall_polylines: list[list[tuple[float, float]]] = field(default_factory=list)
    beam_taper_axes: list[tuple[float, float]] = field(default_factory=list)
    array_taper_axes: list[tuple[float, float]] = field(default_factory=list)
    arc_center: tuple[float, float] = (0.0, 0.0)
    arc_radius: float = 0.0

    @property
    def n_beam(self) -> int:
        return len(self.beam_ports)

    @property
    def n_array(self) -> int:
        return len(self.array_contour)

    @property
    def beam_angles(self) -> np.ndarray:
        return np.array([p.beam_angle for p in self.beam_ports])


# --------------------------------------------------------------------------
# elementary design relations


def expansion_factor(alpha: float, phi_max: float) -> float:
    """Design ratio sin(phi_max)/sin(alpha); both angles in (0, pi/2)."""
    for name, v in (("alpha", alpha), ("phi_max", phi_max)):
        if not 0.0 < v < math.pi / 2:
            raise LensError(f"{name}={v!r} outside (0, pi/2)")
    return math.sin(phi_max) / math.sin(alpha)


def scan_factor(params: LensDesignParams) -> float:
    """Port-angle to beam-angle mapping ratio sin(theta_max)/sin(alpha)."""
    return math.sin(params.theta_max) / math.sin(params.alpha)


def beam_focal_points(params: LensDesignParams) -> list[tuple[float, float]]:
    """The on-axis and the two off-axis focal positions, in order (F0, F+, F-)."""
    params.validate()
    f2 = params.beta * params.f1
    ca, sa = math.cos(params.alpha), math.sin(params.alpha)
    return [(-params.f1, 0.0), (-f2 * ca, f2 * sa), (-f2 * ca, -f2 * sa)]


def focal_steering_angles(params: LensDesignParams) -> list[float]:
    return [0.0, params.theta_max, -params.theta_max]


def _arc_center_radius(params: LensDesignParams) -> tuple[float, float]:
    """Circle through the three focal points; center on the axis by symmetry."""
    ca = math.cos(params.alpha)
    denom = 1.0 - params.beta * ca
    if denom <= 1e-12 or math.sin(params.alpha) <= 1e-12:
        raise LensError("focal points are (near) collinear; beam arc degenerate")
    xc = (1.0 - params.beta ** 2) / (2.0 * denom) * params.f1
    radius = params.f1 - xc
    if radius <= 0:
        raise LensError("beam arc degenerate: non-positive radius")
    return xc, radius


def _arc_point(params: LensDesignParams, ray_angle: float) -> tuple[float, float]:
    """Intersection of the origin ray at `ray_angle` off-axis with the beam arc."""
    xc, radius = _arc_center_radius(params)
    cphi = math.cos(ray_angle)
    disc = xc * xc * cphi * cphi - xc * xc + radius * radius
    if disc < 0:
        raise LensError(f"beam arc does not cover ray angle {ray_angle!r}")
    t = xc * cphi + math.sqrt(disc)
    return (-t * cphi, t * math.sin(ray_angle))


def place_beam_ports(params: LensDesignParams) -> list[BeamPort]:
    """Beam ports on the focal arc, uniform in subtended angle.

    The subtended angle phi is measured at the contour origin.  The port
    reported at phi steers to sin(theta_b) = scan_factor * sin(phi); its
    physical phase center sits on the mirrored ray (-phi) because the lens
    inverts: a wave arriving from +theta focuses on the -y side.  Port 1
    carries phi = -phi_max, the last port +phi_max.
    """
    params.validate()
    g = scan_factor(params)
    n = params.n_beam
    ports = []
    for i in range(n):
        if n == 1:
            phi = 0.0
        else:
            phi = -params.phi_max + 2.0 * params.phi_max * i / (n - 1)
        s = g * math.sin(phi)
        if abs(s) >= 1.0:
            raise LensError(
                f"beam port {i + 1}: scan factor {g:.3f} maps subtended angle "
                f"{math.degrees(phi):.1f} deg outside the visible range")
        ports.append(BeamPort(position=_arc_point(params, -phi),
                              subtended_angle=phi,
                              beam_angle=math.asin(s)))
    return ports


# --------------------------------------------------------------------------
# inner contour / line length solution


def solve_array_point(eta: float, params: LensDesignParams
                      ) -> tuple[tuple[float, float], float]:
    """Contour point and line length for normalized aperture position eta.

    eta = y3 / f1.  Returns ((x2, y2), w) in meters, w relative to the
    on-axis element.  Raises LensError when the path equations admit no
    real solution for this eta.
    """
    params.validate()
    if abs(eta * math.sin(params.alpha)) >= 1.0:
        raise LensError(f"aperture position eta={eta!r} not realizable")
    n_med = math.sqrt(params.eps_eff)
    beta = params.beta
    a0 = math.cos(params.alpha)
    b0 = math.sin(params.alpha)
    if 1.0 - beta * a0 <= 1e-12:
        raise LensError("degenerate design: beta*cos(alpha) ~ 1")
    zeta = eta * math.sin(params.theta_max) / n_med

    # Linear parameterizations x = p + q*w, y = r + s*w (normalized by f1)
    # obtained from the focal-point path differences.
    u = 1.0 / (2.0 * (1.0 - beta * a0))
    p = -(zeta * zeta) * u
    q = -2.0 * (1.0 - beta) * u
    r = zeta / b0
    s = -zeta / (beta * b0)

    # Remaining on-axis condition gives the quadratic in w.
    qa = q * q + s * s - 1.0
    qb = 2.0 * (p * q + q + r * s + 1.0)
    qc = p * p + 2.0 * p + r * r

    if abs(qa) < 1e-14:
        if abs(qb) < 1e-14:
            raise LensError(f"degenerate path equations at eta={eta!r}")
        w = -qc / qb
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0:
            raise LensError(
                f"no real line length at eta={eta!r} (discriminant {disc:.3e})")
        sq = math.sqrt(disc)
        roots = ((-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa))
        w = min(roots, key=abs)  # shortest realizable line

    x = p + q * w
    y = r + s * w
    f1 = params.f1
    return (x * f1, y * f1), w * f1


def solve_quadratic_discriminant(eta: float, params: LensDesignParams) -> float:
    """Discriminant of the line-length quadratic (feasibility diagnostic)."""
    n_med = math.sqrt(params.eps_eff)
    beta, a0, b0 = params.beta, math.cos(params.alpha), math.sin(params.alpha)
    zeta = eta * math.sin(params.theta_max) / n_med
    u = 1.0 / (2.0 * (1.0 - beta * a0))
    p = -(zeta * zeta) * u
    q = -2.0 * (1.0 - beta) * u
    r = zeta / b0
    s = -zeta / (beta * b0)
    qa = q * q + s * s - 1.0
    qb = 2.0 * (p * q + q + r * s + 1.0)
    qc = p * p + 2.0 * p + r * r
    return qb * qb - 4.0 * qa * qc


def aperture_positions(params: LensDesignParams) -> np.ndarray:
    """Radiating-element coordinates, pitch `spacing`, centered on the axis."""
    n = params.n_array
    return (np.arange(n) - (n - 1) / 2.0) * params.spacing


def path_length_residual(geometry: LensGeometry, focal_index: int,
                         element_index: int) -> float:
    """Electrical-path deviation from the element-0 path for one focal point.

    Path = sqrt(eps_eff)*(|F - P_i| + w_i) + y3_i*sin(theta_F); the residual
    is path_i - path_0.
    """
    focals = beam_focal_points(geometry.params)
    angles = focal_steering_angles(geometry.params)
    if not 0 <= focal_index < 3:
        raise IndexError(f"focal_index {focal_index} out of range")
    if not 0 <= element_index < geometry.n_array:
        raise IndexError(f"element_index {element_index} out of range")
    fx, fy = focals[focal_index]
    theta = angles[focal_index]
    n_med = math.sqrt(geometry.eps_eff)

    def total(i: int) -> float:
        x, y = geometry.array_contour[i]
        d = math.hypot(fx - x, fy - y)
        return n_med * (d + geometry.line_lengths[i]) \
            + geometry.aperture_positions[i] * math.sin(theta)

    return total(element_index) - total(0)


# --------------------------------------------------------------------------
# full synthesis


def _contour_point_at(eta: float, params: LensDesignParams) -> tuple[float, float]:
    return solve_array_point(eta, params)[0]


def _contour_normal(eta: float, params: LensDesignParams) -> tuple[float, float]:
    """Outward (array-side, +x) unit normal of the inner contour at eta."""
    d = 1e-6
    pa = _contour_point_at(eta - d, params)
    pb = _contour_point_at(eta + d, params)
    tx, ty = pb[0] - pa[0], pb[1] - pa[1]
    norm = math.hypot(tx, ty)
    if norm == 0.0:
        return (1.0, 0.0)
    nx, ny = ty / norm, -tx / norm
    if nx < 0:
        nx, ny = -nx, -ny
    return (nx, ny)


def _taper_polygon(mouth_a, mouth_b, axis, length, tip_width):
    """Trapezoid from the mouth segment to a `tip_width` end `length` away."""
    cx = (mouth_a[0] + mouth_b[0]) / 2.0
    cy = (mouth_a[1] + mouth_b[1]) / 2.0
    ex, ey = cx + axis[0] * length, cy + axis[1] * length
    tx, ty = -axis[1], axis[0]
    half = tip_width / 2.0
    return [mouth_a,
            (ex + tx * half, ey + ty * half),
            (ex - tx * half, ey - ty * half),
            mouth_b]


def synthesize(params: LensDesignParams) -> LensGeometry:
    """Produce the complete lens geometry for the given design parameters."""
    params.validate()
    eps_eff = params.eps_eff
    f1 = params.f1

    apertures = aperture_positions(params)
    contour: list[tuple[float, float]] = []
    lengths: list[float] = []
    for i, y3 in enumerate(apertures):
        try:
            pt, w = solve_array_point(y3 / f1, params)
        except LensError as exc:
            raise LensError(f"array element {i + 1} failed: {exc}") from exc
        contour.append(pt)
        lengths.append(w)

    ports = place_beam_ports(params)
    xc, radius = _arc_center_radius(params)
    arc_center = (-xc, 0.0)

    taper_len = params.taper_len
    tip = params.trace_width

    # Beam-side tapers: mouths perpendicular to the origin ray, so each port
    # fires through the plate region toward the contour center.
    beam_axes = []
    beam_polys = []
    beam_pitch = _beam_port_pitch(ports, params)
    for k, port in enumerate(ports):
        px, py = port.position
        dist = math.hypot(px, py)
        ax, ay = px / dist, py / dist  # outward: away from the origin
        txv, tyv = -ay, ax
        half = params.port_fill * beam_pitch[k] / 2.0
        ma = (px + txv * half, py + tyv * half)
        mb = (px - txv * half, py - tyv * half)
        beam_axes.append((ax, ay))
        beam_polys.append(_taper_polygon(ma, mb, (ax, ay), taper_len, tip))

    # Array-side tapers: mouths on the contour itself, axes along the local
    # outward normal.
    array_axes = []
    array_polys = []
    eta = apertures / f1
    d_eta = _array_port_half_pitch(contour, eta, params)
    for k in range(params.n_array):
        ma = _contour_point_at(eta[k] + d_eta[k], params)
        mb = _contour_point_at(eta[k] - d_eta[k], params)
        ax, ay = _contour_normal(eta[k], params)
        array_axes.append((ax, ay))
        array_polys.append(_taper_polygon(ma, mb, (ax, ay), taper_len, tip))

    wall_polylines = _wall_polylines(params, ports, beam_polys, contour,
                                     eta, d_eta, arc_center, radius)

    # Side closures between the two contours: dummy (absorbing) openings when
    # requested, plain walls otherwise.
    top_gap = (_arc_edge_point(params, ports, beam_polys, +1),
               _contour_edge_point(array_polys, contour, +1))
    bot_gap = (_arc_edge_point(params, ports, beam_polys, -1),
               _contour_edge_point(array_polys, contour, -1))
    dummy_segments = []
    if params.n_dummy > 0:
        sides = [top_gap, bot_gap]
        per_side = [params.n_dummy // 2 + (params.n_dummy % 2), params.n_dummy // 2]
        for (a, b), count in zip(sides, per_side):
            for j in range(count):
                lo = j / count
                hi = (j + 1) / count
                dummy_segments.append((
                    (a[0] + (b[0] - a[0]) * lo, a[1] + (b[1] - a[1]) * lo),
                    (a[0] + (b[0] - a[0]) * hi, a[1] + (b[1] - a[1]) * hi)))
    else:
        wall_polylines.append([top_gap[0], top_gap[1]])
        wall_polylines.append([bot_gap[0], bot_gap[1]])

    outline = _outline_polygon(params, ports, contour, arc_center, radius)

    geometry = LensGeometry(
        params=params,
        eps_eff=eps_eff,
        beam_ports=ports,
        array_contour=contour,
        line_lengths=lengths,
        aperture_positions=list(apertures),
        dummy_segments=dummy_segments,
        port_segments=beam_polys + array_polys,
        outline=outline,
        wall_polylines=wall_polylines,
        beam_taper_axes=beam_axes,
        array_taper_axes=array_axes,
        arc_center=arc_center,
        arc_radius=radius,
    )
    return geometry


def _beam_port_pitch(ports: list[BeamPort], params: LensDesignParams) -> list[float]:
    """Per-port spacing: distance to nearest neighbor (arc chord)."""
    n = len(ports)
    if n == 1:
        xc, radius = _arc_center_radius(params)
        return [radius * params.phi_max]
    pitch = []
    for k in range(n):
        ds = []
        if k > 0:
            ds.append(math.dist(ports[k].position, ports[k - 1].position))
        if k < n - 1:
            ds.append(math.dist(ports[k].position, ports[k + 1].position))
        pitch.append(min(ds))
    return pitch


def _array_port_half_pitch(contour, eta, params) -> list[float]:
    """Half mouth extents in eta so adjacent mouths keep port_fill spacing."""
    n = len(contour)
    if n == 1:
        return [params.port_fill * 0.25 * params.spacing / params.f1]
    half = []
    for k in range(n):
        gaps = []
        if k > 0:
            gaps.append(abs(eta[k] - eta[k - 1]))
        if k < n - 1:
            gaps.append(abs(eta[k] - eta[k + 1]))
        half.append(params.port_fill * min(gaps) / 2.0)
    return half


def _arc_polyline(params, ang_from, ang_to, arc_center, radius, n=16):
    """Sampled beam-arc points between two arc-center angles (from +x axis)."""
    pts = []
    for t in np.linspace(ang_from, ang_to, n):
        pts.append((arc_center[0] - radius * math.cos(t),
                    arc_center[1] + radius * math.sin(t)))
    return pts


def _arc_angle_of(point, arc_center) -> float:
    return math.atan2(point[1] - arc_center[1], arc_center[0] - point[0])


def _wall_polylines(params, ports, beam_polys, contour, eta, d_eta,
                    arc_center, radius):
    """Conductor polylines: arc wedges between beam mouths, contour wedges
    between array mouths."""
    walls = []
    # beam side: connect mouth corner of port k to mouth corner of port k+1
    # with a short arc polyline.  Ports run from +y (port 1) to -y, and each
    # mouth's corner 0 is its low-y corner.
    for k in range(len(ports) - 1):
        a = beam_polys[k][0]      # low-y corner of port k
        b = beam_polys[k + 1][3]  # high-y corner of port k+1
        ta = _arc_angle_of(a, arc_center)
        tb = _arc_angle_of(b, arc_center)
        walls.append([a] + _arc_polyline(params, ta, tb, arc_center, radius, 8)[1:-1] + [b])
    # array side: contour polyline between adjacent mouth edges
    for k in range(len(contour) - 1):
        a = _contour_point_at(eta[k] + d_eta[k], params)
        b = _contour_point_at(eta[k + 1] - d_eta[k + 1], params)
        mids = [
            _contour_point_at(ev, params)
            for ev in np.linspace(eta[k] + d_eta[k], eta[k + 1] - d_eta[k + 1], 6)[1:-1]
        ]
        walls.append([a] + mids + [b])
    return walls


def _arc_edge_point(params, ports, beam_polys, side: int):
    """Free corner of the outermost beam-port mouth on the +y/-y side."""
    # ports are ordered from +y to -y physically (port 1 at -phi_max subtended
    # sits at +y); side=+1 means the +y extreme.
    if side > 0:
        return beam_polys[0][3]
    return beam_polys[-1][0]


def _contour_edge_point(array_polys, contour, side: int):
    if side > 0:
        return array_polys[-1][0] if contour[-1][1] > contour[0][1] else array_polys[0][0]
    return array_polys[0][3] if contour[-1][1] > contour[0][1] else array_polys[-1][3]


def _outline_polygon(params, ports, contour, arc_center, radius, n_arc=64):
    """Closed polygon around the plate region (arc, side gaps, contour)."""
    t_top = _arc_angle_of(ports[0].position, arc_center) if len(ports) > 1 \
        else math.radians(50.0)
    t_bot = _arc_angle_of(ports[-1].position, arc_center)
    if len(ports) == 1:
        t_bot = -t_top
    pts = _arc_polyline(params, t_top, t_bot, arc_center, radius, n_arc)
    cont = list(contour)
    if cont[0][1] > cont[-1][1]:
        cont = cont[::-1]
    # arc runs +y -> -y; append contour -y -> +y and close
    pts.extend(cont)
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    return pts


def mirrored(geometry: LensGeometry) -> LensGeometry:
    """Geometry reflected about the lens axis, with port order re-sorted."""
    def flip(p):
        return (p[0], -p[1])

    ports = [BeamPort(position=flip(p.position),
                      subtended_angle=-p.subtended_angle,
                      beam_angle=-p.beam_angle)
             for p in geometry.beam_ports][::-1]
    return replace(
        geometry,
        beam_ports=ports,
        array_contour=[flip(p) for p in geometry.array_contour][::-1],
        line_lengths=list(geometry.line_lengths)[::-1],
        aperture_positions=[-y for y in geometry.aperture_positions][::-1],
        dummy_segments=[(flip(a), flip(b)) for a, b in geometry.dummy_segments],
        port_segments=[[flip(p) for p in poly] for poly in geometry.port_segments],
        outline=[flip(p) for p in geometry.outline],
        wall_polylines=[[flip(p) for p in line] for line in geometry.wall_polylines],
        beam_taper_axes=[flip(a) for a in geometry.beam_taper_axes][::-1],
        array_taper_axes=[flip(a) for a in geometry.array_taper_axes][::-1],
        arc_center=flip(geometry.arc_center),
    )


# --------------------------------------------------------------------------
# geometry CSV

GEOMETRY_HEADER = ["kind", "index", "x_m", "y_m", "w_m", "angle_rad"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def export_geometry(geometry: LensGeometry, path) -> None:
    """Write the port/contour/aperture/dummy table as CSV."""
    rows = geometry_rows(geometry)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(GEOMETRY_HEADER)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write geometry CSV {path!r}: {exc}") from exc


def geometry_rows(geometry: LensGeometry) -> list[list[str]]:
    rows = []
    for i, port in enumerate(geometry.beam_ports):
        rows.append(["beam", str(i + 1), _fmt(port.position[0]),
                     _fmt(port.position[1]), _fmt(0.0), _fmt(port.beam_angle)])
    for i, (pt, w) in enumerate(zip(geometry.array_contour, geometry.line_lengths)):
        rows.append(["array", str(i + 1), _fmt(pt[0]), _fmt(pt[1]),
                     _fmt(w), _fmt(0.0)])
    for i, y3 in enumerate(geometry.aperture_positions):
        rows.append(["aperture", str(i + 1), _fmt(0.0), _fmt(y3),
                     _fmt(0.0), _fmt(0.0)])
    for i, (a, b) in enumerate(geometry.dummy_segments):
        rows.append(["dummy_a", str(i + 1), _fmt(a[0]), _fmt(a[1]),
                     _fmt(0.0), _fmt(0.0)])
        rows.append(["dummy_b", str(i + 1), _fmt(b[0]), _fmt(b[1]),
                     _fmt(0.0), _fmt(0.0)])
    return rows


@dataclass
class GeometryTable:
    """Parsed geometry CSV; the same row set export_geometry writes."""

    beam: list[tuple[float, float, float]]       # x, y, beam angle
    array: list[tuple[float, float, float]]      # x, y, w
    aperture: list[float]
    dummy: list[tuple[tuple[float, float], tuple[float, float]]]


def import_geometry(path) -> GeometryTable:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != GEOMETRY_HEADER:
                raise LensError(f"unexpected geometry header {header!r}")
            beam, array, aperture = [], [], []
            dummy_a, dummy_b = {}, {}
            for row in reader:
                kind, idx, x, y, w, ang = row[0], int(row[1]), *map(float, row[2:])
                if kind == "beam":
                    beam.append((x, y, ang))
                elif kind == "array":
                    array.append((x, y, w))
                elif kind == "aperture":
                    aperture.append(y)
                elif kind == "dummy_a":
                    dummy_a[idx] = (x, y)
                elif kind == "dummy_b":
                    dummy_b[idx] = (x, y)
                else:
                    raise LensError(f"unknown geometry row kind {kind!r}")
    except OSError as exc:
        raise OSError(f"cannot read geometry CSV {path!r}: {exc}") from exc
    dummy = [(dummy_a[k], dummy_b[k]) for k in sorted(dummy_a)]
    return GeometryTable(beam=beam, array=array, aperture=aperture, dummy=dummy)


def export_table_csv(table: GeometryTable) -> str:
    """Re-serialize an imported table (round-trip identity check helper)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(GEOMETRY_HEADER)
    for i, (x, y, ang) in enumerate(table.beam):
        writer.writerow(["beam", str(i + 1), _fmt(x), _fmt(y), _fmt(0.0), _fmt(ang)])
    for i, (x, y, w) in enumerate(table.array):
        writer.writerow(["array", str(i + 1), _fmt(x), _fmt(y), _fmt(w), _fmt(0.0)])
    for i, y3 in enumerate(table.aperture):
        writer.writerow(["aperture", str(i + 1), _fmt(0.0), _fmt(y3), _fmt(0.0), _fmt(0.0)])
    for i, (a, b) in enumerate(table.dummy):
        writer.writerow(["dummy_a", str(i + 1), _fmt(a[0]), _fmt(a[1]), _fmt(0.0), _fmt(0.0)])
        writer.writerow(["dummy_b", str(i + 1), _fmt(b[0]), _fmt(b[1]), _fmt(0.0), _fmt(0.0)])
    return buf.getvalue()
