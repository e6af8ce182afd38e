"""X-ray of an analytic function: pre-images of the real axis and of the unit circle.

Curves are traced by predictor-corrector continuation. For the real-axis
pre-image the level function is Im f; for the unit circle it is log|f|. Both
are imaginary parts of an analytic G (G = f, resp. G = i log f), so the
tangent is conj(G')/|G'| and the corrector moves along i conj(G').
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SeedNotOnCurve
from .evaluator import FunctionHandle
from .zeros import SearchRegion, count_zeros, fmt

REAL = "real_preimage"
UNIT = "unit_circle_preimage"

GAMMA_K0 = "gamma_k0"
GAMMA_KJ = "gamma_kj"
CLOSED = "closed_loop"
UNCLASSIFIED = "unclassified"

EDGES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class TraceConfig:
    window: SearchRegion
    grid_step: float = 0.25
    arc_step: float = 0.02
    corrector_tol: float = 1e-9
    max_points: int = 50_000
    node_tol: float = 1e-7

    def __post_init__(self) -> None:
        if not self.arc_step < self.grid_step:
            raise ValueError("arc_step must be smaller than grid_step")
        if not self.corrector_tol < self.arc_step / 10:
            raise ValueError("corrector_tol must be below arc_step/10")


@dataclass
class CurveComponent:
    points: np.ndarray
    values: np.ndarray
    kind: str
    classification: str = UNCLASSIFIED
    exits: tuple[str, ...] = ()
    closed: bool = False
    nodes: tuple[complex, ...] = ()

    @property
    def f_range(self) -> tuple[float, float]:
        re = self.values.real
        return float(re.min()), float(re.max())

    def __len__(self) -> int:
        return len(self.points)


# ---------------------------------------------------------------------------
# level functions


def _level(h: FunctionHandle, s, kind: str):
    """(g, G', f) with g the level function and G' the derivative of its analytic lift."""
    f, d = h.value_and_derivative(s)
    if kind == REAL:
        return np.imag(f), d, f
    return np.log(np.abs(f)), 1j * d / f, f


def residual(f, kind: str):
    """On-curve residual: |Im f| / max(1, |f|), resp. ||f| - 1|."""
    f = np.asarray(f)
    if kind == REAL:
        return np.abs(f.imag) / np.maximum(1.0, np.abs(f))
    return np.abs(np.abs(f) - 1.0)


def _correct(h: FunctionHandle, z: complex, kind: str, tol: float, maxiter: int = 12):
    """Newton along the gradient of the level function; returns (z, f, G', ok)."""
    for _ in range(maxiter):
        g, gp, f = _level(h, z, kind)
        if residual(f, kind) <= tol:
            return z, f, gp, True
        n2 = abs(gp) ** 2
        if n2 == 0 or not np.isfinite(n2):
            return z, f, gp, False
        z = z - g * 1j * gp.conjugate() / n2
    g, gp, f = _level(h, z, kind)
    return z, f, gp, bool(residual(f, kind) <= tol)


def _correct_on_edge(h, z: complex, kind: str, edge: str, tol: float, maxiter: int = 20):
    """1-D Newton along a window edge (vertical edges move t, horizontal move sigma)."""
    for _ in range(maxiter):
        g, gp, f = _level(h, z, kind)
        if residual(f, kind) <= tol:
            return z, f, True
        # d g / dt = Re G',  d g / dsigma = Im G'
        if edge in ("left", "right"):
            dg = gp.real
            if dg == 0:
                break
            z = complex(z.real, z.imag - g / dg)
        else:
            dg = gp.imag
            if dg == 0:
                break
            z = complex(z.real - g / dg, z.imag)
    g, gp, f = _level(h, z, kind)
    return z, f, bool(residual(f, kind) <= tol)


# ---------------------------------------------------------------------------
# seeds


def find_seeds(h: FunctionHandle, cfg: TraceConfig, kinds=(REAL, UNIT)) -> list[tuple[complex, str]]:
    """One seed per sign change of the level function along a grid edge."""
    w = cfg.window
    ns = max(1, int(math.ceil((w.sigma_max - w.sigma_min) / cfg.grid_step)))
    nt = max(1, int(math.ceil((w.t_max - w.t_min) / cfg.grid_step)))
    sig = np.linspace(w.sigma_min, w.sigma_max, ns + 1)
    tt = np.linspace(w.t_min, w.t_max, nt + 1)
    S, T = np.meshgrid(sig, tt)
    Z = S + 1j * T
    F = h(Z.ravel()).reshape(Z.shape)
    seeds: list[tuple[complex, str]] = []
    for kind in kinds:
        G = F.imag if kind == REAL else np.abs(F) - 1.0
        a_list, b_list = [], []
        # horizontal then vertical edges, row-major
        hz = G[:, :-1] * G[:, 1:] < 0
        vt = G[:-1, :] * G[1:, :] < 0
        a_list.append(Z[:, :-1][hz])
        b_list.append(Z[:, 1:][hz])
        a_list.append(Z[:-1, :][vt])
        b_list.append(Z[1:, :][vt])
        a = np.concatenate(a_list)
        b = np.concatenate(b_list)
        if a.size == 0:
            continue
        pts = _bisect_batch(h, a, b, kind)
        for z in pts:
            zc, f, _, ok = _correct(h, complex(z), kind, cfg.corrector_tol)
            if ok and w.contains(zc, pad=1e-12):
                seeds.append((zc, kind))
    return seeds


def _bisect_batch(h, a: np.ndarray, b: np.ndarray, kind: str, iters: int = 40) -> np.ndarray:
    def g(z):
        f = h(z)
        return f.imag if kind == REAL else np.abs(f) - 1.0

    ga = g(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        gm = g(m)
        left = ga * gm <= 0
        b = np.where(left, m, b)
        a = np.where(left, a, m)
        ga = np.where(left, ga, gm)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# tracing


def _exit_edge(w: SearchRegion, z: complex) -> str | None:
    if z.real < w.sigma_min:
        return "left"
    if z.real > w.sigma_max:
        return "right"
    if z.imag < w.t_min:
        return "bottom"
    if z.imag > w.t_max:
        return "top"
    return None


def _clip_to_window(w: SearchRegion, a: complex, b: complex) -> tuple[complex, str]:
    """First point where segment a->b leaves w, and the edge crossed."""
    lam, edge = 1.0, "right"
    d = b - a
    for name, bound, comp, sign in (
        ("left", w.sigma_min, d.real, -1), ("right", w.sigma_max, d.real, 1),
        ("bottom", w.t_min, d.imag, -1), ("top", w.t_max, d.imag, 1),
    ):
        if comp * sign <= 0:
            continue
        start = a.real if name in ("left", "right") else a.imag
        mu = (bound - start) / comp
        if 0 <= mu < lam:
            lam, edge = mu, name
    z = a + lam * d
    # snap exactly onto the edge
    if edge == "left":
        z = complex(w.sigma_min, z.imag)
    elif edge == "right":
        z = complex(w.sigma_max, z.imag)
    elif edge == "bottom":
        z = complex(z.real, w.t_min)
    else:
        z = complex(z.real, w.t_max)
    return z, edge


@dataclass
class _March:
    points: list
    values: list
    exit: str | None = None
    closed: bool = False
    node: complex | None = None


def _march(h, z0: complex, f0: complex, gp0: complex, direction: float, kind: str, cfg: TraceConfig, budget: int) -> _March:
    w = cfg.window
    tol = cfg.corrector_tol
    pts, vals = [z0], [f0]
    z, gp = z0, gp0
    prev_t = direction * gp.conjugate() / abs(gp)
    step = cfg.arc_step
    min_step = cfg.arc_step / 512
    travelled = 0.0
    out = _March(pts, vals)
    while len(pts) < budget:
        if abs(gp) < cfg.node_tol:
            out.node = z
            return out
        tan = gp.conjugate() / abs(gp)
        if (tan * prev_t.conjugate()).real < 0:
            tan = -tan
        p, fp, gpp, ok = _correct(h, z + step * tan, kind, tol)
        moved = p - z
        if ok and 0 < abs(moved) < 1.5 * step and (moved * tan.conjugate()).real > 0.8 * abs(moved):
            edge = _exit_edge(w, p)
            if edge is not None:
                q, edge = _clip_to_window(w, z, p)
                q, fq, ok_edge = _correct_on_edge(h, q, kind, edge, tol)
                if ok_edge and w.contains(q, pad=1e-9):
                    pts.append(q)
                    vals.append(fq)
                out.exit = edge
                return out
            travelled += abs(moved)
            if travelled > 4 * cfg.arc_step and abs(p - pts[0]) < 0.75 * cfg.arc_step:
                out.closed = True
                return out
            pts.append(p)
            vals.append(fp)
            z, gp, prev_t = p, gpp, tan
            step = min(cfg.arc_step, 2 * step)
        else:
            step /= 2
            if step < min_step:
                out.node = z
                return out
    return out


def trace_component(h: FunctionHandle, seed: complex, kind: str, cfg: TraceConfig) -> CurveComponent:
    """Trace the level-curve component through ``seed`` in both directions."""
    z0, f0, gp0, ok = _correct(h, complex(seed), kind, cfg.corrector_tol)
    if not ok:
        raise SeedNotOnCurve(f"no {kind} point near seed {seed}")
    nodes = []
    if abs(gp0) < max(cfg.node_tol, 10 * cfg.corrector_tol):
        return CurveComponent(np.array([z0]), np.array([f0]), kind, nodes=(z0,))
    fwd = _march(h, z0, f0, gp0, 1.0, kind, cfg, cfg.max_points)
    if fwd.node is not None:
        nodes.append(fwd.node)
    if fwd.closed:
        comp = CurveComponent(np.array(fwd.points), np.array(fwd.values), kind, closed=True, nodes=tuple(nodes))
        comp.classification = classify_component(comp, cfg) if kind == REAL else CLOSED
        return comp
    bwd = _march(h, z0, f0, gp0, -1.0, kind, cfg, max(2, cfg.max_points - len(fwd.points)))
    if bwd.node is not None:
        nodes.append(bwd.node)
    points = np.array(bwd.points[::-1] + fwd.points[1:])
    values = np.array(bwd.values[::-1] + fwd.values[1:])
    exits = tuple(e for e in (bwd.exit, fwd.exit) if e is not None)
    comp = CurveComponent(points, values, kind, exits=exits, nodes=tuple(nodes))
    if kind == REAL:
        comp.classification = classify_component(comp, cfg)
    return comp


def classify_component(c: CurveComponent, cfg: TraceConfig | None = None) -> str:
    """gamma_k0: reaches the right edge with Re f < 1 throughout; gamma_kj: never
    reaches the right edge; closed_loop: closes on itself; otherwise unclassified."""
    if c.closed:
        return CLOSED
    if c.kind != REAL:
        return UNCLASSIFIED
    if "right" in c.exits:
        return GAMMA_K0 if c.f_range[1] < 1 else UNCLASSIFIED
    return GAMMA_KJ


def _near_any(z: complex, comps: list[CurveComponent], radius: float) -> bool:
    for c in comps:
        if np.min(np.abs(c.points - z)) < radius:
            return True
    return False


def xray(
    h: FunctionHandle, cfg: TraceConfig, kinds=(REAL, UNIT), extra_seeds: list[complex] = ()
) -> list[CurveComponent]:
    """Trace every component found from grid seeds (plus optional extra real-preimage seeds).

    Seeds lying on an already traced component are skipped, so each component
    appears once; processing order is deterministic.
    """
    seeds = find_seeds(h, cfg, kinds)
    if REAL in kinds:
        seeds += [(complex(z), REAL) for z in extra_seeds]
    comps: list[CurveComponent] = []
    for z, kind in seeds:
        same = [c for c in comps if c.kind == kind]
        if _near_any(z, same, 1.5 * cfg.arc_step):
            continue
        try:
            comps.append(trace_component(h, z, kind, cfg))
        except SeedNotOnCurve:
            continue
    return comps


# ---------------------------------------------------------------------------
# strips


@dataclass
class StripReport:
    sigma_ref: float
    intercepts: list[float] = field(default_factory=list)
    spacings: list[float] = field(default_factory=list)
    zero_counts: list[int] = field(default_factory=list)
    gaps: list[str] = field(default_factory=list)
    components: list[CurveComponent] = field(default_factory=list)

    @property
    def mean_spacing(self) -> float:
        return float(np.mean(self.spacings)) if self.spacings else float("nan")

    def count_trend(self) -> float:
        """Least-squares slope of zero counts against ln(mid-height)."""
        if len(self.zero_counts) < 2:
            return float("nan")
        mids = 0.5 * (np.array(self.intercepts[:-1]) + np.array(self.intercepts[1:]))
        return float(np.polyfit(np.log(mids), np.array(self.zero_counts, dtype=float), 1)[0])

    def table(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("k", "t_lower", "t_upper", "spacing", "zero_count"))
        for k, (a, b) in enumerate(zip(self.intercepts[:-1], self.intercepts[1:])):
            w.writerow((k, fmt(a), fmt(b), fmt(self.spacings[k]), self.zero_counts[k]))
        return buf.getvalue()


def _vertical_crossing(h, c: CurveComponent, sigma_ref: float, tol: float) -> float | None:
    """t where the polyline first crosses sigma = sigma_ref, walking in from the right end."""
    pts = c.points
    if "right" in c.exits and abs(pts[0].real - c.points.real.max()) < abs(pts[-1].real - c.points.real.max()):
        pass
    else:
        pts = pts[::-1]
    d = pts.real - sigma_ref
    idx = np.flatnonzero(d[:-1] * d[1:] <= 0)
    if idx.size == 0:
        return None
    k = idx[0]
    a, b = pts[k], pts[k + 1]
    lam = 0.0 if b.real == a.real else (sigma_ref - a.real) / (b.real - a.real)
    z = complex(sigma_ref, a.imag + lam * (b.imag - a.imag))
    z, _, _ = _correct_on_edge(h, z, REAL, "left", tol)
    return z.imag


def strip_report(
    h: FunctionHandle, t_min: float, t_max: float, sigma_ref: float = 0.0, cfg: TraceConfig | None = None,
    *, count_zeros_in_strips: bool = True, margin: float = 5.0,
) -> StripReport:
    """Intercepts of gamma_k0 curves with sigma = sigma_ref for t in [t_min, t_max].

    Curves are seeded on the right window edge where Im f changes sign with
    Re f < 1, traced, and kept when they classify as gamma_k0. One intercept is
    recorded per curve. Zero counts use the rectangle between consecutive
    intercepts over the window's sigma range.
    """
    report = StripReport(sigma_ref)
    if not t_max > t_min:
        return report
    if cfg is None:
        cfg = TraceConfig(SearchRegion(-8.0, 8.0, max(t_min - margin, 0.5), t_max + margin), grid_step=0.25, arc_step=0.05)
    w = cfg.window
    if not w.sigma_min < sigma_ref < w.sigma_max:
        raise ValueError(f"sigma_ref={sigma_ref} outside the window")
    tt = np.arange(w.t_min, w.t_max + cfg.grid_step, cfg.grid_step)
    tt = tt[tt <= w.t_max]
    edge = w.sigma_max + 1j * tt
    F = h(edge)
    sc = np.flatnonzero(F.imag[:-1] * F.imag[1:] < 0)
    seeds = _bisect_batch(h, edge[sc], edge[sc + 1], REAL)
    comps: list[CurveComponent] = []
    for z in seeds:
        z0, f0, ok = _correct_on_edge(h, complex(z), REAL, "right", cfg.corrector_tol)
        if not ok or f0.real >= 1:
            continue
        if _near_any(z0, comps, 1.5 * cfg.arc_step):
            continue
        c = trace_component(h, z0, REAL, cfg)
        comps.append(c)
        if c.classification != GAMMA_K0:
            report.gaps.append(f"curve from {z0.imag:.6f} classified {c.classification}")
            continue
        t_cross = _vertical_crossing(h, c, sigma_ref, cfg.corrector_tol)
        if t_cross is None:
            report.gaps.append(f"gamma_k0 from {z0.imag:.6f} does not reach sigma={sigma_ref}")
            continue
        if t_min <= t_cross <= t_max:
            report.intercepts.append(t_cross)
    report.components = comps
    report.intercepts.sort()
    report.spacings = [b - a for a, b in zip(report.intercepts[:-1], report.intercepts[1:])]
    if count_zeros_in_strips:
        for a, b in zip(report.intercepts[:-1], report.intercepts[1:]):
            report.zero_counts.append(count_zeros(h, SearchRegion(w.sigma_min, w.sigma_max, a, b)))
    return report


# ---------------------------------------------------------------------------
# embracing


def points_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule; polygon given as complex vertices (closed implicitly)."""
    x, y = points.real[:, None], points.imag[:, None]
    xa, ya = poly.real[None, :], poly.imag[None, :]
    xb, yb = np.roll(poly.real, -1)[None, :], np.roll(poly.imag, -1)[None, :]
    cond = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xa + (y - ya) * (xb - xa) / (yb - ya)
    crossing = cond & (x < xint)
    return (crossing.sum(axis=1) % 2) == 1


def _closed_polygon(c: CurveComponent) -> np.ndarray:
    """Vertices of c closed along the window boundary; adjacent exit edges route via their corner."""
    if c.closed or len(c.exits) != 2:
        return c.points
    (e0, e1), p0, p1 = c.exits, c.points[0], c.points[-1]
    vertical = ("left", "right")
    if (e0 in vertical) != (e1 in vertical):
        pv, ph = (p0, p1) if e0 in vertical else (p1, p0)
        return np.append(c.points, complex(pv.real, ph.imag))
    return c.points


def detect_embracing(components: list[CurveComponent]) -> list[tuple[int, int]]:
    """Pairs (i, j): component j lies inside the polygon formed by component i
    (a gamma_kj closed by the chord between its window exits, or a closed loop)."""
    pairs = []
    for i, c in enumerate(components):
        if c.kind != REAL or c.classification not in (GAMMA_KJ, CLOSED) or len(c) < 3:
            continue
        poly = _closed_polygon(c)
        for j, d in enumerate(components):
            if j == i or len(d) == 0:
                continue
            if points_in_polygon(d.points, poly).all():
                pairs.append((i, j))
    return pairs


# ---------------------------------------------------------------------------
# output

_COLORS = {GAMMA_K0: "#1b1b1b", GAMMA_KJ: "#8fa8c8", CLOSED: "#6a8f5a", UNCLASSIFIED: "#999999"}
PX_PER_UNIT = 100


def render_svg(components, zeros, out_path, window: SearchRegion | None = None) -> Path:
    """Static SVG: sigma to the right, t upward, 100 px per unit."""
    if window is None:
        pts = [c.points for c in components if len(c)] + [np.array([z for z in zeros], dtype=complex)]
        allp = np.concatenate(pts) if pts and sum(p.size for p in pts) else np.array([0j, 1 + 1j])
        window = SearchRegion(
            float(allp.real.min()), float(max(allp.real.max(), allp.real.min() + 1e-9)),
            float(allp.imag.min()), float(max(allp.imag.max(), allp.imag.min() + 1e-9)),
        )
    W = (window.sigma_max - window.sigma_min) * PX_PER_UNIT
    H = (window.t_max - window.t_min) * PX_PER_UNIT

    def xy(z: complex) -> str:
        return f"{(z.real - window.sigma_min) * PX_PER_UNIT:.2f},{(window.t_max - z.imag) * PX_PER_UNIT:.2f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.2f}" height="{H:.2f}" viewBox="0 0 {W:.2f} {H:.2f}">',
        f'<rect x="0" y="0" width="{W:.2f}" height="{H:.2f}" fill="white" stroke="black" stroke-width="1"/>',
        '<g id="axes" stroke="#444444" stroke-width="0.8">',
    ]
    if window.sigma_min <= 0 <= window.sigma_max:
        out.append(f'<line x1="{-window.sigma_min * PX_PER_UNIT:.2f}" y1="0" x2="{-window.sigma_min * PX_PER_UNIT:.2f}" y2="{H:.2f}"/>')
    if window.t_min <= 0 <= window.t_max:
        out.append(f'<line x1="0" y1="{window.t_max * PX_PER_UNIT:.2f}" x2="{W:.2f}" y2="{window.t_max * PX_PER_UNIT:.2f}"/>')
    if window.sigma_min <= 0.5 <= window.sigma_max:
        x = (0.5 - window.sigma_min) * PX_PER_UNIT
        out.append(f'<line x1="{x:.2f}" y1="0" x2="{x:.2f}" y2="{H:.2f}" stroke-dasharray="2,4"/>')
    out.append("</g>")
    out.append('<g id="curves" fill="none">')
    for k, c in enumerate(components):
        if len(c) == 0:
            continue
        coords = " ".join(xy(z) for z in c.points)
        if c.kind == UNIT:
            style = 'stroke="#c0392b" stroke-width="1.2" stroke-dasharray="6,4"'
        else:
            style = f'stroke="{_COLORS[c.classification]}" stroke-width="1.6"'
        tag = "polygon" if c.closed else "polyline"
        out.append(f'<{tag} id="c{k}" class="{c.kind} {c.classification}" {style} points="{coords}"/>')
    out.append("</g>")
    out.append('<g id="zeros" fill="#d35400" stroke="black" stroke-width="0.5">')
    for z in zeros:
        z = complex(z)
        x, y = xy(z).split(",")
        out.append(f'<circle class="zero" cx="{x}" cy="{y}" r="4"/>')
    out.append("</g>")
    out.append("</svg>")
    path = Path(out_path)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


CURVE_CSV_COLUMNS = ("component_id", "kind", "classification", "idx", "sigma", "t", "re_f", "im_f")


def curves_csv(components) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_CSV_COLUMNS)
    for k, c in enumerate(components):
        for i, (z, f) in enumerate(zip(c.points, c.values)):
            w.writerow((k, c.kind, c.classification, i, fmt(z.real), fmt(z.imag), fmt(f.real), fmt(f.imag)))
    return buf.getvalue()


def export_csv(components, out_path) -> Path:
    path = Path(out_path)
    path.write_text(curves_csv(components), encoding="utf-8")
    return path
