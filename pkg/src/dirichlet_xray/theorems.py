"""Numerical experiments around Euler products, derivative zeros between
symmetric zero pairs, the local involution f(phi(s)) = f(s), and ratios of
Euler factors at s and at its reflection."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CollapsedToIdentity, NewtonDiverged, NoRootOnSegment, VanishingFactor
from .evaluator import CauchyParams, FunctionHandle, derivative_many, reflection
from .series import (
    VANISHING_FLOOR,
    LogRule,
    SeriesSpec,
    coefficients_upto,
    compensated_sum,
    euler_factors,
    euler_partial_product,
    exponents_upto,
    partial_sum,
    primes_up_to,
)
from .zeros import LINE_TOL, ZeroPair, fmt

# partial sums paired with a product over p <= P use N = P^2 terms, capped here
SUM_CAP = 2_000_000
SEG_TOL = 1e-4
DERIV_TOL = 1e-6


@dataclass
class TheoremReport:
    kind: str
    inputs: dict
    residual: float
    tolerance: float
    passed: bool | None = None
    artifacts: list[str] = field(default_factory=list)
    note: str = ""

    def __post_init__(self) -> None:
        if self.passed is None:
            self.passed = bool(self.residual <= self.tolerance)

    def line(self) -> str:
        args = " ".join(f"{k}={v}" for k, v in self.inputs.items())
        verdict = "PASS" if self.passed else "FAIL"
        tail = f" # {self.note}" if self.note else ""
        return f"{self.kind} {args} residual={fmt(self.residual)} tol={fmt(self.tolerance)} {verdict}{tail}"


def render_reports(reports: list[TheoremReport]) -> str:
    return "".join(r.line() + "\n" for r in reports)


# ---------------------------------------------------------------------------
# Euler product vs series


@dataclass(frozen=True)
class EulerResidual:
    residual: float
    tail_estimate: float
    P: int
    N: int

    def __float__(self) -> float:
        return self.residual


def _abs_tail(spec: SeriesSpec, sigma: float, N: int, span: int = 8) -> float:
    """Measured sum of |a_n| exp(-lambda_n sigma) over (N, span*N], plus an
    integral estimate of what lies beyond (assumes |a_n| <= 1, lambda_n ~ ln n)."""
    M = span * N
    a = np.abs(coefficients_upto(spec, M))[N + 1:]
    lam = exponents_upto(spec, M)[N + 1:]
    measured = math.fsum((a * np.exp(-lam * sigma)).tolist())
    beyond = M ** (1 - sigma) / (sigma - 1) if sigma > 1 else math.inf
    return measured + beyond


def euler_product_residual(spec: SeriesSpec, s: complex, P: int) -> EulerResidual:
    """|prod_{p<=P} (1 - a_p e^{-lambda_p s})^{-1} - sum_{n<=N} a_n e^{-lambda_n s}|, N = P^2 (capped).

    The tail estimate bounds both truncations: the omitted primes contribute
    about sum_{p>P} p^{-sigma}, the omitted terms about N^{1-sigma}/(sigma-1).
    """
    s = complex(s)
    N = min(P * P, SUM_CAP)
    prod = euler_partial_product(spec, s, P)
    ssum = partial_sum(spec, s, N)
    sig = s.real
    if sig > 1:
        tail = (P ** (1 - sig) / ((sig - 1) * math.log(max(P, 2))) + N ** (1 - sig) / (sig - 1)) * abs(prod)
    else:
        tail = math.inf
    return EulerResidual(abs(prod - ssum), float(tail), P, N)


@dataclass(frozen=True)
class SieveCheck:
    residual: float
    bound: float
    k: int
    N: int

    @property
    def excess(self) -> float:
        return self.residual - self.bound


def sieve_step_check(spec: SeriesSpec, s: complex, k: int, N: int) -> SieveCheck:
    """Multiply the partial sum by the first k Euler factors and compare with
    the subseries over n <= N coprime to those primes.

    P_k S_N - S'_N = T'_N - P_k T_N with T the tails, so the residual is at
    most (prod (1 + |a_p| e^{-lambda_p sigma}) + 1) * sum_{n>N} |a_n| e^{-lambda_n sigma}.
    """
    s = complex(s)
    a = coefficients_upto(spec, N)
    lam = exponents_upto(spec, N)
    n = np.arange(N + 1)
    terms = a[1:] * np.exp(-lam[1:] * s)
    keep = np.ones(N, dtype=bool)
    primes = primes_up_to(max(2, 64 * (k + 1)))[:k] if k > 0 else np.array([], dtype=np.int64)
    if len(primes) < k:
        raise ValueError(f"k={k} too large")
    for p in primes:
        keep &= n[1:] % p != 0
    prod = 1.0 + 0j
    weight = 1.0
    for p in primes:
        f = 1.0 - a[p] * np.exp(-lam[p] * s)
        prod *= f
        weight *= 1.0 + abs(a[p]) * math.exp(-lam[p] * s.real)
    full = compensated_sum(terms)
    sub = compensated_sum(terms[keep])
    residual = abs(prod * full - sub)
    bound = 0.0 if k == 0 else (weight + 1.0) * _abs_tail(spec, s.real, N)
    return SieveCheck(residual, bound, k, N)


# ---------------------------------------------------------------------------
# derivative zero between a symmetric pair


@dataclass
class SegmentExperiment:
    pair: ZeroPair
    tau_grid: int
    tau0: float
    s_tau0: complex
    deriv_abs: float
    re_s: float
    im_offset: float
    re_f: float
    segment_min_deriv: float
    segment_min_tau: float
    on_segment: bool

    def summary(self) -> str:
        return (
            f"tau0={self.tau0:.6f} s={self.s_tau0.real:.8f}{self.s_tau0.imag:+.8f}i |f'|={self.deriv_abs:.3e} "
            f"|Im s - t|={self.im_offset:.3e} Re f={self.re_f:.6f} min|f'| on segment={self.segment_min_deriv:.3e}"
        )


def _newton_fprime(h: FunctionHandle, z: complex, cp: CauchyParams, maxiter: int = 40) -> complex:
    for _ in range(maxiter):
        _, d1 = h.value_and_derivative(z)
        d2 = derivative_many(h, z, order=2, cp=cp)
        if d2 == 0:
            break
        step = d1 / d2
        if abs(step) > 0.05:
            step *= 0.05 / abs(step)
        z -= step
        if abs(step) < 1e-14 * max(1.0, abs(z)):
            break
    return z


def segment_derivative_zero(
    h: FunctionHandle, pair: ZeroPair, deriv_tol: float = DERIV_TOL, seg_tol: float = SEG_TOL,
    tau_grid: int = 2000, line_tol: float = LINE_TOL,
) -> SegmentExperiment:
    """Look for a zero of f' on the segment from the right zero to the left one.

    |f'| is scanned along s(tau) = (1 - tau) s1 + tau s2; each local minimum
    seeds a Newton iteration on f' in the plane. The root nearest the segment
    is reported. NoRootOnSegment (with ``.experiment``) is raised when that
    root is further than seg_tol from the segment or |f'| stays above deriv_tol.
    """
    s1, s2 = pair.right.location, pair.left.location
    if not s1.real > 0.5 + line_tol:
        raise ValueError("pair must be off the critical line")
    tau = np.linspace(0.0, 1.0, tau_grid + 1)
    seg = (1 - tau) * s1 + tau * s2
    _, d = h.value_and_derivative(seg)
    ad = np.abs(d)
    inner = np.flatnonzero((ad[1:-1] <= ad[:-2]) & (ad[1:-1] <= ad[2:])) + 1
    kmin = int(np.argmin(ad[1:-1])) + 1
    cands = sorted(set(inner.tolist()) | {kmin}, key=lambda k: ad[k])[:6]
    cp = CauchyParams()
    best = None
    for k in cands:
        z = _newton_fprime(h, complex(seg[k]), cp)
        _, dz = h.value_and_derivative(z)
        # distance to the horizontal segment
        lo, hi = min(s1.real, s2.real), max(s1.real, s2.real)
        dx = max(lo - z.real, 0.0, z.real - hi)
        dist = math.hypot(dx, z.imag - 0.5 * (s1.imag + s2.imag))
        key = (abs(dz) > deriv_tol, dist)
        if best is None or key < best[0]:
            best = (key, z, abs(dz), dist)
    _, z, dabs, dist = best
    span = s2 - s1
    tau0 = float(((z - s1) * span.conjugate()).real / abs(span) ** 2)
    t_mid = 0.5 * (s1.imag + s2.imag)
    exp = SegmentExperiment(
        pair=pair, tau_grid=tau_grid, tau0=tau0, s_tau0=z, deriv_abs=dabs, re_s=z.real,
        im_offset=abs(z.imag - t_mid), re_f=float(complex(h(z)).real),
        segment_min_deriv=float(ad[kmin]), segment_min_tau=float(tau[kmin]),
        on_segment=bool(dist <= seg_tol and 0.0 <= tau0 <= 1.0),
    )
    if dabs > deriv_tol or not exp.on_segment:
        err = NoRootOnSegment(
            f"nearest zero of f' is {dist:.3e} from the segment ({exp.summary()})"
        )
        err.experiment = exp
        raise err
    return exp


# ---------------------------------------------------------------------------
# local involution


def solve_conjugate_point(
    h: FunctionHandle, s: complex, seed: complex | None = None, tol: float = 1e-14, maxiter: int = 60,
    identity_tol: float = 1e-6,
) -> complex:
    """Newton-solve f(w) = f(s) starting from ``seed`` (default: the reflection of s)."""
    s = complex(s)
    w = complex(reflection(s)) if seed is None else complex(seed)
    target = complex(h(s))
    for _ in range(maxiter):
        fw, dw = h.value_and_derivative(w)
        if dw == 0:
            raise NewtonDiverged(f"f' vanishes at {w}")
        step = (fw - target) / dw
        if abs(step) > 0.1:
            step *= 0.1 / abs(step)
        w -= step
        if abs(step) <= tol * max(1.0, abs(w)):
            break
    else:
        raise NewtonDiverged(f"no convergence solving f(w) = f({s}) from {seed}")
    if abs(w - s) < identity_tol:
        raise CollapsedToIdentity(f"Newton returned s itself ({s}); seed lies in the same injectivity domain")
    return w


def phi_derivative(h: FunctionHandle, s: complex, step: float = 1e-5) -> complex:
    """Central finite difference of phi at s (each phi value seeded from phi(s))."""
    w = solve_conjugate_point(h, s)
    plus = solve_conjugate_point(h, s + step, seed=w)
    minus = solve_conjugate_point(h, s - step, seed=w)
    return (plus - minus) / (2 * step)


@dataclass(frozen=True)
class InvolutionProbe:
    s: complex
    phi: complex
    phi_phi: complex
    dphi: complex
    dphi_back: complex
    fprime_s: complex
    fprime_phi: complex

    @property
    def involution_error(self) -> float:
        return abs(self.phi_phi - self.s)

    @property
    def derivative_product_error(self) -> float:
        return abs(self.dphi * self.dphi_back - 1)

    @property
    def contraction_consistent(self) -> bool:
        return (abs(self.dphi) < 1) == (abs(self.fprime_s) < abs(self.fprime_phi))


def involution_probes(h: FunctionHandle, center: complex, radius: float = 0.05, count: int = 20) -> list[InvolutionProbe]:
    """Probe points on a circle around ``center`` (typically a zero of an off-line pair)."""
    out = []
    for j in range(count):
        s = complex(center) + radius * complex(math.cos(2 * math.pi * (j + 0.5) / count), math.sin(2 * math.pi * (j + 0.5) / count))
        w = solve_conjugate_point(h, s)
        back = solve_conjugate_point(h, w)
        out.append(InvolutionProbe(
            s, w, back, phi_derivative(h, s), phi_derivative(h, w),
            h.value_and_derivative(s)[1], h.value_and_derivative(w)[1],
        ))
    return out


# ---------------------------------------------------------------------------
# Euler factor ratios at s and 1 - conj(s)


def factor_ratio(a_p: complex, lam: float, sigma: float, t: float) -> complex:
    u, v = complex(1 - sigma, t), complex(sigma, t)
    return (1 - a_p * np.exp(-lam * u)) / (1 - a_p * np.exp(-lam * v))


def factor_identity_residual(a_p: complex, lam: float, sigma: float, t: float) -> float:
    """Relative gap between the factor ratio and its rewritten form
    [(e^{lam u} - a)/(e^{lam v} - a)] e^{lam (2 sigma - 1)}."""
    u, v = complex(1 - sigma, t), complex(sigma, t)
    lhs = factor_ratio(a_p, lam, sigma, t)
    rhs = (np.exp(lam * u) - a_p) / (np.exp(lam * v) - a_p) * math.exp(lam * (2 * sigma - 1))
    return float(abs(lhs - rhs) / max(abs(lhs), 1e-300))


@dataclass
class RatioTrace:
    sigma: float
    t: float
    prime_cutoffs: list[int]
    values: list[complex]
    envelope: list[float]

    @property
    def log_gap(self) -> list[float]:
        """log|P_N| minus the envelope, per cutoff."""
        return [math.log(abs(v)) - e if v != 0 else -math.inf for v, e in zip(self.values, self.envelope)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("cutoff", "sigma", "t", "re_P", "im_P", "abs_P", "envelope", "log_gap"))
        for N, v, e, g in zip(self.prime_cutoffs, self.values, self.envelope, self.log_gap):
            w.writerow((N, fmt(self.sigma), fmt(self.t), fmt(v.real), fmt(v.imag), fmt(abs(v)), fmt(e), fmt(g)))
        return buf.getvalue()

    def write_csv(self, path) -> Path:
        p = Path(path)
        p.write_text(self.to_csv(), encoding="utf-8")
        return p


def ratio_product_trace(spec: SeriesSpec, sigma: float, t: float, cutoffs) -> RatioTrace:
    """P_N = prod_{p<=N} (1 - a_p e^{-lam_p(1-sigma+it)}) / (1 - a_p e^{-lam_p(sigma+it)}).

    Logs of the factors are accumulated with compensated summation; at
    sigma = 1/2 numerator and denominator coincide, so every P_N is exactly 1.
    """
    cutoffs = sorted(int(c) for c in cutoffs)
    if not cutoffs:
        return RatioTrace(sigma, t, [], [], [])
    top = cutoffs[-1]
    v = complex(sigma, t)
    u = complex(1 - sigma, t)
    primes, den = euler_factors(spec, v, top)
    _, num = euler_factors(spec, u, top)
    small = np.abs(den) < VANISHING_FLOOR
    if small.any():
        raise VanishingFactor(int(primes[small][0]), v)
    logs = np.log(num) - np.log(den)
    if isinstance(spec.exponents, LogRule):
        lp = np.log(primes.astype(float))
    else:
        lp = np.array([spec.exponents.at_prime(int(p)) for p in primes])
    values, env = [], []
    for N in cutoffs:
        m = int(np.searchsorted(primes, N, side="right"))
        values.append(complex(np.exp(compensated_sum(logs[:m]))))
        env.append(math.fsum((lp[:m] * (2 * sigma - 1)).tolist()))
    return RatioTrace(sigma, t, cutoffs, values, env)


__all__ = [
    "TheoremReport", "EulerResidual", "euler_product_residual", "SieveCheck", "sieve_step_check",
    "SegmentExperiment", "segment_derivative_zero", "solve_conjugate_point", "phi_derivative",
    "InvolutionProbe", "involution_probes", "factor_ratio", "factor_identity_residual",
    "RatioTrace", "ratio_product_trace", "render_reports",
]
