"""Zero counting (argument principle), location (quadrisection + Newton) and
pairing of zeros under s -> 1 - conj(s)."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .errors import BoundaryZero, NewtonDiverged, PoleInRegion
from .evaluator import FunctionHandle, derivative_many, reflection

REFINE_TOL = 1e-8
LINE_TOL = 1e-6
PAIR_TOL = 1e-6
MAX_PHASE_STEP = math.pi / 2
_MIN_EDGE_STEP = 1e-7
_MIN_CELL = 1e-4
# split cells slightly off-centre so lines of symmetry (sigma = 1/2) are not cut
_SPLIT = 0.5 + 0.0371


@dataclass(frozen=True)
class SearchRegion:
    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float

    def __post_init__(self) -> None:
        if not (self.sigma_min < self.sigma_max and self.t_min < self.t_max):
            raise ValueError(f"degenerate region {self}")

    @property
    def size(self) -> float:
        return max(self.sigma_max - self.sigma_min, self.t_max - self.t_min)

    @property
    def center(self) -> complex:
        return complex((self.sigma_min + self.sigma_max) / 2, (self.t_min + self.t_max) / 2)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.sigma_min - pad <= z.real <= self.sigma_max + pad
            and self.t_min - pad <= z.imag <= self.t_max + pad
        )

    def corners(self) -> list[complex]:
        a, b, c, d = self.sigma_min, self.sigma_max, self.t_min, self.t_max
        return [complex(a, c), complex(b, c), complex(b, d), complex(a, d)]

    def grown(self, delta: float) -> "SearchRegion":
        return SearchRegion(self.sigma_min - delta, self.sigma_max + delta, self.t_min - delta, self.t_max + delta)

    def split(self, fs: float = _SPLIT, ft: float = _SPLIT) -> list["SearchRegion"]:
        sm = self.sigma_min + fs * (self.sigma_max - self.sigma_min)
        tm = self.t_min + ft * (self.t_max - self.t_min)
        # very tall cells are cut in t only
        if self.t_max - self.t_min > 4 * (self.sigma_max - self.sigma_min):
            return [
                SearchRegion(self.sigma_min, self.sigma_max, self.t_min, tm),
                SearchRegion(self.sigma_min, self.sigma_max, tm, self.t_max),
            ]
        return [
            SearchRegion(self.sigma_min, sm, self.t_min, tm),
            SearchRegion(sm, self.sigma_max, self.t_min, tm),
            SearchRegion(sm, self.sigma_max, tm, self.t_max),
            SearchRegion(self.sigma_min, sm, tm, self.t_max),
        ]


@dataclass(frozen=True)
class ZeroRecord:
    location: complex
    multiplicity: int
    residual: float
    newton_iters: int
    on_critical_line: bool

    @property
    def sigma(self) -> float:
        return self.location.real

    @property
    def t(self) -> float:
        return self.location.imag


@dataclass(frozen=True)
class ZeroPair:
    right: ZeroRecord
    left: ZeroRecord
    pair_gap: float

    @property
    def degenerate(self) -> bool:
        return self.right is self.left or self.right.location == self.left.location


class _BoundaryHit(Exception):
    def __init__(self, where: complex):
        super().__init__(f"zero on or near the contour at {where}")
        self.where = where


# ---------------------------------------------------------------------------
# argument principle


class _EdgeCache:
    """Adaptively sampled edges, shared between neighbouring cells."""

    def __init__(self, h: FunctionHandle, step: float, floor: float):
        self.h = h
        self.step = step
        self.floor = floor
        self._edges: dict[tuple[complex, complex], tuple[np.ndarray, np.ndarray]] = {}
        self.evaluations = 0

    def _key(self, a: complex, b: complex) -> tuple[tuple[complex, complex], bool]:
        ka, kb = (a.real, a.imag), (b.real, b.imag)
        return ((a, b), False) if ka <= kb else ((b, a), True)

    def edge(self, a: complex, b: complex) -> tuple[np.ndarray, np.ndarray]:
        key, rev = self._key(a, b)
        if key not in self._edges:
            self._edges[key] = self._sample(*key)
        z, f = self._edges[key]
        return (z[::-1], f[::-1]) if rev else (z, f)

    def _sample(self, a: complex, b: complex) -> tuple[np.ndarray, np.ndarray]:
        length = abs(b - a)
        n = max(4, int(math.ceil(length / self.step)))
        u = np.linspace(0.0, 1.0, n + 1)
        f = self.h(a + (b - a) * u)
        self.evaluations += f.size
        while True:
            self._check(a, b, u, f)
            dphi = np.abs(np.angle(f[1:] / f[:-1]))
            bad = np.flatnonzero(dphi >= MAX_PHASE_STEP)
            if bad.size == 0:
                return a + (b - a) * u, f
            if (u[bad + 1] - u[bad]).min() * length < _MIN_EDGE_STEP:
                k = bad[0]
                raise _BoundaryHit(a + (b - a) * u[k])
            mid = 0.5 * (u[bad] + u[bad + 1])
            fm = self.h(a + (b - a) * mid)
            self.evaluations += fm.size
            u = np.insert(u, bad + 1, mid)
            f = np.insert(f, bad + 1, fm)

    def _check(self, a, b, u, f):
        small = np.abs(f) < self.floor
        if small.any():
            raise _BoundaryHit(a + (b - a) * u[np.flatnonzero(small)[0]])


def _winding(cache: _EdgeCache, r: SearchRegion) -> float:
    c = r.corners()
    total = 0.0
    for k in range(4):
        _, f = cache.edge(c[k], c[(k + 1) % 4])
        total += float(np.sum(np.angle(f[1:] / f[:-1])))
    return total / (2 * math.pi)


_POLE_GAP = 1e-3


def _check_poles(h: FunctionHandle, r: SearchRegion) -> SearchRegion:
    """Reject poles inside r; a pole on (or near) the boundary pulls that edge inward."""
    if not h.pole_at_one or not r.contains(1 + 0j, pad=_POLE_GAP):
        return r
    gaps = {
        "sigma_min": 1 - r.sigma_min,
        "sigma_max": r.sigma_max - 1,
        "t_min": 0 - r.t_min,
        "t_max": r.t_max - 0,
    }
    edge, gap = min(gaps.items(), key=lambda kv: kv[1])
    if gap > _POLE_GAP:
        raise PoleInRegion(f"s=1 lies inside region {r}")
    moved = 2 * _POLE_GAP - gap
    delta = {"sigma_min": moved, "sigma_max": -moved, "t_min": moved, "t_max": -moved}[edge]
    return replace(r, **{edge: getattr(r, edge) + delta})


def _count(cache: _EdgeCache, r: SearchRegion) -> int:
    w = _winding(cache, r)
    n = int(round(w))
    if abs(w - n) > 0.25 or n < 0:
        raise _BoundaryHit(r.center)
    return n


def count_zeros(h: FunctionHandle, r: SearchRegion, *, refine_tol: float = REFINE_TOL, step: float = 0.05) -> int:
    """Number of zeros (with multiplicity) inside r by the argument principle.

    The boundary is resampled until consecutive phase steps stay below pi/2.
    A zero on the contour moves the offending region outward by 1e-4 of its
    size, at most three times.
    """
    r = _check_poles(h, r)
    for attempt in range(4):
        cache = _EdgeCache(h, step, floor=1e-3 * refine_tol)
        try:
            return _count(cache, r)
        except _BoundaryHit as hit:
            if attempt == 3:
                raise BoundaryZero(f"zero on the boundary of {r} near {hit.where}") from None
            r = _check_poles(h, r.grown(1e-4 * r.size))
    raise AssertionError("unreachable")


def disk_winding(h: FunctionHandle, z: complex, radius: float, nodes: int = 64) -> int:
    """Winding number of f around 0 along a small circle centred at z."""
    theta = 2 * np.pi * np.arange(nodes + 1) / nodes
    f = h(z + radius * np.exp(1j * theta))
    dphi = np.angle(f[1:] / f[:-1])
    if np.abs(dphi).max() >= MAX_PHASE_STEP:
        return disk_winding(h, z, radius, nodes * 4) if nodes < 4096 else int(round(dphi.sum() / (2 * np.pi)))
    return int(round(dphi.sum() / (2 * np.pi)))


# ---------------------------------------------------------------------------
# Newton refinement


def _newton(h: FunctionHandle, z0: complex, tol: float, cell: SearchRegion, maxiter: int = 60):
    """Damped Newton on f; returns (z, |f(z)|, iterations) or None."""
    z = complex(z0)
    fz = complex(h(z))
    pad = 0.25 * cell.size
    for it in range(1, maxiter + 1):
        d = derivative_many(h, z)
        if d == 0:
            return None
        step = fz / d
        lam = 1.0
        while True:
            zn = z - lam * step
            fn = complex(h(zn))
            if abs(fn) < abs(fz) or lam < 1e-4:
                break
            lam *= 0.5
        z, fz = zn, fn
        if not cell.contains(z, pad):
            return None
        if abs(fz) <= tol and abs(lam * step) < 1e-13 * max(1.0, abs(z)):
            return z, abs(fz), it
        if abs(lam * step) < 1e-15 * max(1.0, abs(z)):
            return (z, abs(fz), it) if abs(fz) <= tol else None
    return (z, abs(fz), maxiter) if abs(fz) <= tol else None


def _refine_in_cell(h: FunctionHandle, cell: SearchRegion, tol: float):
    starts = [cell.center]
    ds, dt = cell.sigma_max - cell.sigma_min, cell.t_max - cell.t_min
    for k in range(8):
        ang = 2 * math.pi * k / 8
        starts.append(cell.center + complex(0.3 * ds * math.cos(ang), 0.3 * dt * math.sin(ang)))
    for z0 in starts:
        out = _newton(h, z0, tol, cell)
        if out is not None and cell.contains(out[0], pad=1e-9):
            return out
    raise NewtonDiverged(f"Newton failed in cell {cell}", cell)


# ---------------------------------------------------------------------------
# location


@dataclass
class _Scan:
    h: FunctionHandle
    tol: float
    refine_tol: float
    line_tol: float
    cache: _EdgeCache
    found: list = field(default_factory=list)


def _locate_cell(scan: _Scan, cell: SearchRegion, n: int, depth: int = 0) -> None:
    if n == 0:
        return
    small = cell.size < _MIN_CELL
    if n == 1 or small or depth > 60:
        try:
            z, res, iters = _refine_in_cell(scan.h, cell, scan.tol)
        except NewtonDiverged:
            if small or depth > 60:
                raise
        else:
            scan.found.append((z, res, iters, n))
            return
    for attempt in range(4):
        shift = 0.0137 * attempt
        kids = cell.split(_SPLIT + shift, _SPLIT - shift)
        try:
            counts = [_count(scan.cache, k) for k in kids]
        except _BoundaryHit:
            continue
        if sum(counts) != n:
            continue
        for k, c in zip(kids, counts):
            _locate_cell(scan, k, c, depth + 1)
        return
    raise BoundaryZero(f"cannot split cell {cell} without cutting a zero")


def _scan_slab(h, tol, refine_tol, line_tol, step, cell: SearchRegion) -> list:
    scan = _Scan(h, tol, refine_tol, line_tol, _EdgeCache(h, step, floor=1e-3 * refine_tol))
    _locate_cell(scan, cell, _count(scan.cache, cell))
    return scan.found


def _is_trivial(h: FunctionHandle, z: complex) -> bool:
    if h.fe is None:
        return False
    return abs(complex(h.fe(z))) < 1e-10


def locate_zeros(
    h: FunctionHandle,
    r: SearchRegion,
    tol: float = 1e-10,
    *,
    refine_tol: float = REFINE_TOL,
    line_tol: float = LINE_TOL,
    step: float = 0.05,
    slab: float | None = 4.0,
    workers: int = 1,
) -> list[ZeroRecord]:
    """All zeros of h in r, refined by Newton until |f| <= tol.

    Cells are split until each holds at most one zero by count. Records come
    back sorted by t, then sigma. Zeros of M (trivial zeros) are dropped.
    The region is cut into t-slabs that are scanned independently, so
    ``workers`` > 1 gives the same records as a serial run.
    """
    r = _check_poles(h, r)
    for attempt in range(4):
        try:
            cells = _slabs(r, slab)
            job = partial(_scan_slab, h, tol, refine_tol, line_tol, step)
            if workers > 1 and len(cells) > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    found = [f for part in pool.map(job, cells) for f in part]
            else:
                found = [f for c in cells for f in job(c)]
            break
        except _BoundaryHit as hit:
            if attempt == 3:
                raise BoundaryZero(f"zero on the boundary of {r} near {hit.where}") from None
            r = _check_poles(h, r.grown(1e-4 * r.size))
    records = []
    for z, res, iters, n in found:
        if _is_trivial(h, z):
            continue
        mult = disk_winding(h, z, 10 * refine_tol)
        if mult < 1:
            mult = n
        records.append(ZeroRecord(z, mult, res, iters, abs(z.real - 0.5) <= line_tol))
    records.sort(key=lambda rec: (rec.t, rec.sigma))
    return records


def _slabs(r: SearchRegion, height: float | None) -> list[SearchRegion]:
    if height is None or r.t_max - r.t_min <= height:
        return [r]
    n = int(math.ceil((r.t_max - r.t_min) / height))
    edges = np.linspace(r.t_min, r.t_max, n + 1)
    return [SearchRegion(r.sigma_min, r.sigma_max, float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]


# ---------------------------------------------------------------------------
# pairing and classification


def classify_zero(z: ZeroRecord | complex, line_tol: float = LINE_TOL) -> str:
    loc = z.location if isinstance(z, ZeroRecord) else complex(z)
    return "on_line" if abs(loc.real - 0.5) <= line_tol else "off_line"


def pair_zeros(zeros: list[ZeroRecord], pair_tol: float = PAIR_TOL, line_tol: float = LINE_TOL):
    """Match each off-line zero with the zero nearest its reflection.

    On-line zeros form degenerate self-pairs. Returns (pairs, unpaired); pairs
    are ordered by t of the right member.
    """
    pairs: list[ZeroPair] = []
    unpaired: list[ZeroRecord] = []
    off = []
    for z in zeros:
        if classify_zero(z, line_tol) == "on_line":
            pairs.append(ZeroPair(z, z, abs(z.location - reflection(z.location))))
        else:
            off.append(z)
    used: set[int] = set()
    rights = sorted((i for i, z in enumerate(off) if z.sigma > 0.5), key=lambda i: (off[i].t, off[i].sigma))
    for i in rights:
        target = reflection(off[i].location)
        best, gap = None, math.inf
        for j, w in enumerate(off):
            if j == i or j in used or w.sigma >= 0.5:
                continue
            d = abs(w.location - target)
            if d < gap:
                best, gap = j, d
        if best is not None and gap <= pair_tol:
            used.update((i, best))
            pairs.append(ZeroPair(off[i], off[best], gap))
    unpaired = [z for k, z in enumerate(off) if k not in used]
    pairs.sort(key=lambda p: (p.right.t, p.right.sigma))
    return pairs, unpaired


# ---------------------------------------------------------------------------
# CSV

ZERO_CSV_COLUMNS = ("function", "sigma", "t", "residual", "multiplicity", "on_line", "pair_id")


def fmt(x: float) -> str:
    """12 significant digits, uppercase exponent, locale independent."""
    x = float(x)
    if x == 0:
        x = 0.0  # drop negative zero
    return f"{x:.11E}"


def zeros_csv(function: str, zeros: list[ZeroRecord], pair_tol: float = PAIR_TOL) -> str:
    pairs, _ = pair_zeros(zeros, pair_tol)
    ids: dict[int, int] = {}
    for k, p in enumerate(pairs, 1):
        ids[id(p.right)] = k
        ids[id(p.left)] = k
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ZERO_CSV_COLUMNS)
    for z in zeros:
        pid = ids.get(id(z))
        w.writerow([
            function, fmt(z.sigma), fmt(z.t), fmt(z.residual), z.multiplicity,
            "true" if z.on_critical_line else "false", "" if pid is None else pid,
        ])
    return buf.getvalue()


def with_line_tol(z: ZeroRecord, line_tol: float) -> ZeroRecord:
    return replace(z, on_critical_line=abs(z.sigma - 0.5) <= line_tol)
