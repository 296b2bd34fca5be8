"""Zero-separating polygonal curves in 2D and sampled surface
certificates in any dimension.

A curve from the x1-axis side to the x2-axis side separates the origin
from the rest of the open quadrant.  It certifies invariance of the far
region when at every point the local inclusion cone lies on the outward
side: g . nu >= 0 for every cone generator g, nu the outward unit normal.

Construction: the curve descends monotonically (x1 strictly decreasing,
x2 strictly increasing).  Hyperplanes whose log-space line enters the
open third quadrant are crossed once each, in the angular order of their
interior directions, by straight state-space segments parallel to the
hyperplane normal (so nu _|_ n exactly inside the band); between bands a
connector runs along the middle direction of the sector's admissible
normal cone.  Every n_j . log x is strictly monotone along every segment
(normals have sign pattern (+,-), travel directions (-,+)), so each band
boundary is hit exactly once and all junctions come from bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import IntegratorOptions, RateBand, RateSchedule, integrate
from .geometry import Arrangement, fan_inclusion_cone, inclusion_cone, polar_cone
from .network import ReactionNetwork

_SCALE_FLOOR = 1e-300
_MAX_HALVINGS = 1000
_SEG_SAMPLES = 33  # construction self-check density per segment


class BandsOverlap(RuntimeError):
    pass


class InfeasibleAdjustment(RuntimeError):
    pass


class _RetryScale(Exception):
    pass


@dataclass(frozen=True, eq=False)
class CurveSegment:
    """Straight state-space segment with outward unit normal; band_index
    names the hyperplane whose band the segment crosses, None for
    connectors."""

    start: tuple[float, float]
    end: tuple[float, float]
    normal: tuple[float, float]
    band_index: int | None


@dataclass(frozen=True, eq=False)
class PolygonalCurve2D:
    """Simple monotone chain from near the x1-axis to near the x2-axis."""

    segments: tuple[CurveSegment, ...]
    scale: float
    delta: float

    def __post_init__(self):
        if not self.segments:
            raise ValueError("curve needs at least one segment")
        for a, b in zip(self.segments, self.segments[1:]):
            if a.end != b.start:
                raise ValueError("segments must chain end-to-start")
        verts = self.vertices
        for p, q in zip(verts, verts[1:]):
            if not (q[0] < p[0] and q[1] > p[1]):
                raise ValueError("chain must decrease in x1 and increase in x2")
        for p in verts:
            if p[0] <= 0.0 or p[1] <= 0.0:
                raise ValueError("curve must stay in the open quadrant")
        for seg in self.segments:
            nu = np.array(seg.normal)
            if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
                raise ValueError("segment normals must be unit vectors")
            if nu[0] < -1e-12 or nu[1] < -1e-12:
                raise ValueError("normals must point away from the origin side")
            chord = np.array(seg.end) - np.array(seg.start)
            # the floor covers coordinate roundoff on hops much shorter
            # than the endpoint magnitudes
            tol = 1e-9 * float(np.linalg.norm(chord)) + 1e-13 * max(
                abs(c) for c in seg.start + seg.end)
            if abs(float(nu @ chord)) > tol:
                raise ValueError("normal must be orthogonal to its segment")

    @property
    def vertices(self) -> tuple[tuple[float, float], ...]:
        return (self.segments[0].start,) + tuple(s.end for s in self.segments)

    def to_json_dict(self) -> dict:
        return {
            "scale": self.scale,
            "delta": self.delta,
            "segments": [{
                "start": list(s.start),
                "end": list(s.end),
                "normal": list(s.normal),
                "band_index": s.band_index,
            } for s in self.segments],
        }


@dataclass(frozen=True, eq=False)
class SurfaceCertificate:
    """Sampled surface: (point, outward unit normal) pairs plus the mesh
    spacing they were drawn at."""

    samples: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...]
    h: float

    def __post_init__(self):
        for x, nu in self.samples:
            if any(c <= 0.0 for c in x):
                raise ValueError("sample points must be strictly positive")
            if abs(math.sqrt(sum(c * c for c in nu)) - 1.0) > 1e-9:
                raise ValueError("sample normals must be unit vectors")

    def to_json_dict(self) -> dict:
        return {
            "h": self.h,
            "samples": [{"x": list(x), "nu": list(nu)} for x, nu in self.samples],
        }


# ---------------------------------------------------------------------------
# construction

def _crossing_order(arr: Arrangement) -> list[int]:
    """Indices of hyperplanes whose lines enter the open third quadrant
    (canonical normals with n1 > 0 > n2), ordered as met from the x1-axis
    side: steepest interior direction first."""
    idx = [i for i, h in enumerate(arr.hyperplanes)
           if h.normal[0] > 0.0 and h.normal[1] < 0.0]
    # interior direction d = (n2, -n1); slope |d2|/|d1| = n1/(-n2)
    idx.sort(key=lambda i: arr.hyperplanes[i].normal[0]
             / (-arr.hyperplanes[i].normal[1]), reverse=True)
    return idx


def _interior_direction(n) -> np.ndarray:
    return np.array([n[1], -n[0]])


def _sector_normal_cone(normals: np.ndarray, probe: np.ndarray) -> np.ndarray:
    """Extreme rays of {nu : nu . g >= 0 for all inclusion-cone generators
    g of the cell containing the probe direction}."""
    gens = []
    for n in normals:
        s = math.copysign(1.0, float(n @ probe))
        gens.append(s * n)  # -(-s n) passed to the polar computation
    rays = polar_cone(np.array(gens), dim=2)
    return rays


def _mid_normal(rays: np.ndarray) -> np.ndarray:
    """Angular midpoint of the admissible normal cone clipped to the open
    positive quadrant (normals there give monotone travel directions)."""
    if rays.shape[0] != 2:
        raise _RetryScale
    angs = sorted(math.atan2(r[1], r[0]) for r in rays)
    lo, hi = angs
    if hi - lo > math.pi:  # rays straddle the angle seam
        lo, hi = hi, lo + 2.0 * math.pi
    lo = max(lo, 1e-12)
    hi = min(hi, 0.5 * math.pi - 1e-12)
    if not lo < hi:
        raise _RetryScale
    mid = 0.5 * (lo + hi)
    return np.array([math.cos(mid), math.sin(mid)])


def _first_hit(p: np.ndarray, u: np.ndarray, n: np.ndarray, level: float) -> float:
    """Smallest tau > 0 with n . log(p + tau u) = level.  Requires the
    projection to be strictly decreasing along u and to start above the
    level; the positivity boundary brackets the root."""
    def f(tau):
        q = p + tau * u
        return float(n @ np.log(q)) - level

    if f(0.0) <= 0.0:
        raise _RetryScale
    limits = [-p[c] / u[c] for c in range(2) if u[c] < 0.0]
    tau_max = min(limits) * (1.0 - 1e-12)
    if f(tau_max) > 0.0:
        raise _RetryScale
    lo, hi = 0.0, tau_max
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _axis_hit(p: np.ndarray, u: np.ndarray, x1_target: float) -> float:
    if u[0] >= 0.0 or p[0] <= x1_target:
        raise _RetryScale
    return (x1_target - p[0]) / u[0]


def _check_clear(points, normals: np.ndarray, delta: float, skip: int | None):
    for q in points:
        proj = np.abs(normals @ np.log(q))
        for j, v in enumerate(proj):
            if j == skip:
                continue
            if v < delta:
                raise _RetryScale


def _segment_points(a: np.ndarray, b: np.ndarray, k: int) -> list[np.ndarray]:
    return [a + (b - a) * (i / (k - 1.0)) for i in range(k)]


def _construct(arr: Arrangement, delta: float, scale: float) -> PolygonalCurve2D:
    tiny = 1e-10 * scale
    normals = arr.normal_matrix()
    order = _crossing_order(arr)
    pad = delta + max(0.001 * delta, 1e-4)

    start = np.array([scale, tiny])

    # a band hugging the x1-axis below the start corridor is never entered;
    # the curve begins on its far side and stays there
    crossings: list[int] = []
    for i in order:
        v = float(arr.hyperplanes[i].vector @ np.log(start))
        if v > pad:
            crossings.append(i)
        elif v > -pad:
            raise _RetryScale  # start sits inside or against the band
    k = len(crossings)

    if k == 0:
        b = np.array([tiny, scale])
        if len(arr):
            _check_clear(_segment_points(start, b, _SEG_SAMPLES), normals,
                         delta, None)
        nu = (math.sqrt(0.5), math.sqrt(0.5))
        seg = CurveSegment(tuple(start), (tiny, scale), nu, None)
        return PolygonalCurve2D((seg,), scale, delta)

    dirs = [_interior_direction(arr.hyperplanes[i].normal) for i in crossings]
    segments: list[CurveSegment] = []
    p = start
    for pos, hyp in enumerate(crossings):
        n = np.array(arr.hyperplanes[hyp].normal)
        u = -n  # travel direction (-, +): n . log x strictly decreasing
        if pos == 0:
            # absorb the leading run into the first crossing segment when
            # the band exit stays clear of the axis corridor; otherwise
            # approach the band through the start cell first
            absorbed = False
            try:
                tau_try = _first_hit(p, u, n, -pad)
                absorbed = p[0] + tau_try * u[0] >= 10.0 * tiny
            except _RetryScale:
                absorbed = False
            if not absorbed:
                rays = _sector_normal_cone(normals, np.log(p))
                nu_c = _mid_normal(rays)
                u_c = np.array([-nu_c[1], nu_c[0]])
                if not (u_c[0] < 0.0 < u_c[1]):
                    raise _RetryScale
                tau = _first_hit(p, u_c, n, pad)
                for nxt in crossings[1:]:
                    n2 = np.array(arr.hyperplanes[nxt].normal)
                    if _first_hit(p, u_c, n2, pad) < tau:
                        raise _RetryScale
                q = p + tau * u_c
                _check_clear(_segment_points(p, q, _SEG_SAMPLES), normals,
                             delta, None)
                segments.append(CurveSegment(tuple(p), tuple(q),
                                             (float(nu_c[0]), float(nu_c[1])),
                                             None))
                p = q
        # later entries sit exactly at +pad (bisection residue either side)
        elif float(n @ np.log(p)) <= 0.5 * (pad + delta):
            raise _RetryScale
        last = pos == k - 1
        tau = _first_hit(p, u, n, -pad)
        if last:
            if p[0] <= tiny:
                last_done = True  # already inside the axis corridor
            else:
                # absorb the trailing run into the crossing when the band
                # is already behind by the time the corridor is reached
                tau_axis = _axis_hit(p, u, tiny)
                if tau_axis >= tau:
                    tau = tau_axis
                    last_done = True
                else:
                    last_done = False
        else:
            # no later band boundary may come first
            for nxt in crossings[pos + 1:]:
                n2 = np.array(arr.hyperplanes[nxt].normal)
                if float(n2 @ np.log(p)) <= pad:
                    raise _RetryScale
                if _first_hit(p, u, n2, pad) < tau:
                    raise _RetryScale
        q = p + tau * u
        nu = -dirs[pos]
        _check_clear(_segment_points(p, q, _SEG_SAMPLES), normals, delta, hyp)
        segments.append(CurveSegment(tuple(p), tuple(q),
                                     (float(nu[0]), float(nu[1])), hyp))
        p = q
        if last:
            if not last_done:
                # trailing connector through the final sector to the axis
                probe = dirs[pos] + np.array([-1.0, 0.0])
                rays = _sector_normal_cone(normals, probe)
                nu_c = _mid_normal(rays)
                u_c = np.array([-nu_c[1], nu_c[0]])
                if not (u_c[0] < 0.0 < u_c[1]):
                    raise _RetryScale
                q = p + _axis_hit(p, u_c, tiny) * u_c
                _check_clear(_segment_points(p, q, _SEG_SAMPLES), normals,
                             delta, None)
                segments.append(CurveSegment(tuple(p), tuple(q),
                                             (float(nu_c[0]), float(nu_c[1])),
                                             None))
            break
        # connector across the sector between crossings pos and pos+1
        probe = dirs[pos] + dirs[pos + 1]
        rays = _sector_normal_cone(normals, probe)
        nu_c = _mid_normal(rays)
        u_c = np.array([-nu_c[1], nu_c[0]])
        if not (u_c[0] < 0.0 < u_c[1]):
            raise _RetryScale
        n_next = np.array(arr.hyperplanes[crossings[pos + 1]].normal)
        tau = _first_hit(p, u_c, n_next, pad)
        for nxt in crossings[pos + 2:]:
            n2 = np.array(arr.hyperplanes[nxt].normal)
            if _first_hit(p, u_c, n2, pad) < tau:
                raise _RetryScale
        q = p + tau * u_c
        _check_clear(_segment_points(p, q, _SEG_SAMPLES), normals, delta, None)
        segments.append(CurveSegment(tuple(p), tuple(q),
                                     (float(nu_c[0]), float(nu_c[1])), None))
        p = q

    junctions = [np.array(s.start) for s in segments[1:]]
    _check_clear(junctions, normals, delta, None)
    return PolygonalCurve2D(tuple(segments), scale, delta)


def build_zero_separating_curve_2d(arr: Arrangement, delta: float,
                                   scale: float = 1e-3) -> PolygonalCurve2D:
    """Curve at distance ~scale from the origin crossing every band of the
    arrangement once.  Halves the scale (up to 1000 times) whenever bands
    collide along the tentative curve."""
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if not (0.0 < scale < 1.0):
        raise ValueError("scale must lie in (0, 1)")
    for h in arr.hyperplanes:
        if len(h.normal) != 2:
            raise ValueError("2D construction needs a 2D arrangement")
    s = scale
    for _ in range(_MAX_HALVINGS):
        try:
            return _construct(arr, delta, s)
        except _RetryScale:
            s *= 0.5
            if s < _SCALE_FLOOR:
                break
    raise BandsOverlap(
        f"bands still overlap after shrinking scale to {s}")


# ---------------------------------------------------------------------------
# faithfulness

_FAITHFUL_MARGIN = 1e-6  # radians of angular slack


def _connector_margin(seg: CurveSegment, arr: Arrangement) -> float:
    """Angular distance of the segment normal to the boundary of the
    admissible normal cone of its cell."""
    mid = 0.5 * (np.array(seg.start) + np.array(seg.end))
    normals = arr.normal_matrix()
    # cell signs from the segment midpoint's log position
    rays = _sector_normal_cone(normals, np.log(mid))
    nu = np.array(seg.normal)
    ang = math.atan2(nu[1], nu[0])
    margins = []
    for r in rays:
        r = r / np.linalg.norm(r)
        margins.append(abs(ang - math.atan2(r[1], r[0])))
    return min(margins) if margins else math.pi


def make_faithful_2d(curve: PolygonalCurve2D, arr: Arrangement,
                     delta: float) -> PolygonalCurve2D:
    """Ensure every connector normal sits strictly inside its cell's
    admissible cone (angular margin >= 1e-6 rad); band segments keep their
    defining directions.  Already-faithful curves are returned unchanged."""
    connectors = [s for s in curve.segments if s.band_index is None]
    if all(_connector_margin(s, arr) >= _FAITHFUL_MARGIN for s in connectors):
        return curve
    rebuilt = build_zero_separating_curve_2d(arr, delta, curve.scale)
    for s in rebuilt.segments:
        if s.band_index is None and _connector_margin(s, arr) < _FAITHFUL_MARGIN:
            raise InfeasibleAdjustment(
                f"cell at {s.start} leaves no angular slack for a connector")
    return rebuilt


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True, eq=False)
class Violation:
    sample_index: int
    x: tuple[float, ...]
    nu: tuple[float, ...]
    generator: tuple[float, ...]
    dot: float

    def to_json_dict(self) -> dict:
        return {"sample_index": self.sample_index, "x": list(self.x),
                "nu": list(self.nu), "generator": list(self.generator),
                "dot": self.dot}


@dataclass(frozen=True, eq=False)
class VerificationOutcome:
    passed: bool
    violations: tuple[Violation, ...]

    def to_json_dict(self) -> dict:
        return {"passed": self.passed,
                "violations": [v.to_json_dict() for v in self.violations]}


def verify_zero_separating(cert: SurfaceCertificate, fan_or_arr, delta: float,
                           tol: float = 1e-9) -> VerificationOutcome:
    """Per-sample invariance test: every inclusion-cone generator g at
    log x must satisfy g . nu >= -tol.  Works in any dimension; the cone
    source may be an Arrangement or an iterable of fan cone generators."""
    violations = []
    for i, (x, nu) in enumerate(cert.samples):
        logx = np.log(np.array(x))
        if isinstance(fan_or_arr, Arrangement):
            gens = inclusion_cone(fan_or_arr, delta, logx)
        else:
            gens = fan_inclusion_cone(fan_or_arr, delta, logx)
        nu_arr = np.array(nu)
        for g in gens:
            d = float(g @ nu_arr)
            if d < -tol:
                violations.append(Violation(i, tuple(x), tuple(nu),
                                            tuple(float(c) for c in g), d))
    return VerificationOutcome(not violations, tuple(violations))


def curve_to_certificate(curve: PolygonalCurve2D,
                         samples_per_segment: int = 10) -> SurfaceCertificate:
    """Midpoint samples along every segment with the segment's normal."""
    if samples_per_segment < 1:
        raise ValueError("need at least one sample per segment")
    samples = []
    longest = 0.0
    for seg in curve.segments:
        a = np.array(seg.start)
        b = np.array(seg.end)
        longest = max(longest, float(np.linalg.norm(b - a)))
        for j in range(samples_per_segment):
            t = (j + 0.5) / samples_per_segment
            x = a + t * (b - a)
            samples.append((tuple(float(c) for c in x), seg.normal))
    return SurfaceCertificate(tuple(samples), longest / samples_per_segment)


def point_certificate_1d(x: float) -> SurfaceCertificate:
    """Degenerate 1-D separating surface: a single point with the outward
    direction +1 (the inclusion below the point forces dx/dt >= 0)."""
    if x <= 0.0:
        raise ValueError("separating point must be positive")
    return SurfaceCertificate((((float(x),), (1.0,)),), 0.0)


# ---------------------------------------------------------------------------
# trajectory crossing

def _point_in_origin_region(q, verts) -> bool:
    """Even-odd test against the closed polygon curve + axis segments."""
    first, last = verts[0], verts[-1]
    poly = list(verts) + [(0.0, last[1]), (0.0, 0.0), (first[0], 0.0)]
    x, y = q
    inside = False
    m = len(poly)
    for i in range(m):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % m]
        if (y1 > y) != (y2 > y):
            t = (y - y1) / (y2 - y1)
            if x < x1 + t * (x2 - x1):
                inside = not inside
    return inside


def _distance_to_chain(q, verts) -> float:
    best = math.inf
    qx, qy = q
    for (x1, y1), (x2, y2) in zip(verts, verts[1:]):
        dx, dy = x2 - x1, y2 - y1
        L2 = dx * dx + dy * dy
        t = 0.0 if L2 == 0.0 else max(0.0, min(1.0, ((qx - x1) * dx + (qy - y1) * dy) / L2))
        px, py = x1 + t * dx, y1 + t * dy
        best = min(best, math.hypot(qx - px, qy - py))
    return best


def signed_distance_to_curve(q, curve: PolygonalCurve2D) -> float:
    """Distance to the curve, negative on the origin side."""
    verts = curve.vertices
    d = _distance_to_chain(q, verts)
    return -d if _point_in_origin_region(q, verts) else d


@dataclass(frozen=True, eq=False)
class CrossingReport:
    min_signed_distance: float
    per_schedule: tuple[float, ...]
    crossed: bool
    seed: int

    def to_json_dict(self) -> dict:
        return {"min_signed_distance": self.min_signed_distance,
                "per_schedule": list(self.per_schedule),
                "crossed": self.crossed, "seed": self.seed}


def trajectory_crossing_test(curve: PolygonalCurve2D, net: ReactionNetwork,
                             band: RateBand, n_schedules: int, horizon: float,
                             seed: int = 0, switch_period: float | None = None,
                             opts: IntegratorOptions | None = None) -> CrossingReport:
    """Integrate seeded banded-rate trajectories from the far side of the
    curve and report the smallest signed distance ever observed."""
    if n_schedules < 1:
        raise ValueError("need at least one schedule")
    rng = np.random.default_rng(seed)
    period = switch_period if switch_period is not None else horizon / 8.0
    base = 100.0 * max(max(v) for v in curve.vertices)
    minima = []
    for _ in range(n_schedules):
        x0 = base * np.exp(rng.uniform(0.0, math.log(10.0), size=2))
        schedule = RateSchedule.random(len(net.reactions), band, period,
                                       horizon, rng)
        traj = integrate(net, schedule, x0, horizon, opts)
        d = min(signed_distance_to_curve(tuple(state), curve)
                for state in traj.states)
        minima.append(float(d))
    overall = min(minima)
    return CrossingReport(overall, tuple(minima), overall <= 0.0, seed)


# ---------------------------------------------------------------------------
# SVG export

def curve_to_svg(curve: PolygonalCurve2D, arr: Arrangement | None = None,
                 width: int = 480, height: int = 480) -> str:
    """Log-log rendering of the curve; band center lines drawn dashed."""
    pts = []
    for seg in curve.segments:
        a, b = np.array(seg.start), np.array(seg.end)
        for i in range(17):
            pts.append(np.log(a + (b - a) * (i / 16.0)))
    pts = np.array(pts)
    lo = pts.min(axis=0) - 1.0
    hi = pts.max(axis=0) + 1.0
    span = hi - lo

    def to_px(p):
        x = (p[0] - lo[0]) / span[0] * (width - 20) + 10
        y = height - ((p[1] - lo[1]) / span[1] * (height - 20) + 10)
        return f"{x:.2f},{y:.2f}"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">']
    if arr is not None:
        for h in arr.hyperplanes:
            n = h.normal
            d = np.array([-n[1], n[0]])
            c = (lo + hi) / 2.0
            c = c - (c @ np.array(n)) * np.array(n)
            r = float(np.linalg.norm(hi - lo))
            a, b = c - r * d, c + r * d
            parts.append(f'<line x1="{to_px(a).split(",")[0]}" '
                         f'y1="{to_px(a).split(",")[1]}" '
                         f'x2="{to_px(b).split(",")[0]}" '
                         f'y2="{to_px(b).split(",")[1]}" '
                         'stroke="#999" stroke-dasharray="4 3"/>')
    path = " ".join(to_px(p) for p in pts)
    parts.append(f'<polyline points="{path}" fill="none" stroke="#c33" '
                 'stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts)
