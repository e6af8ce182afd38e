"""Analytically continued evaluation of zeta, Hurwitz zeta, Dirichlet L-functions
and the Davenport-Heilbronn function.

Everything reduces to Euler-Maclaurin sums for zeta(s, a) (see ``kernels``).
Points with Re s < 0 are evaluated through the registered functional equation,
which keeps the direct sums in the half-plane where they are well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import bernoulli, loggamma, psi

from . import kernels
from .errors import (
    NoFunctionalEquation,
    PoleAtOne,
    PoleInsideCircle,
    SpecParseError,
)
from .series import (
    DirichletCharacter,
    SeriesSpec,
    abscissa_of_convergence,
    character_table,
    coefficients_upto,
    compensated_sum,
    exponents_upto,
    parse_spec,
)

POLE_EPS = 1e-12
REFLECT_BELOW = 0.0
ROUND_EPS = 4 * 2.0**-52
# entire handles built from Hurwitz pieces are evaluated near s = 1 by the
# mean value over a circle
NEAR_ONE = 1e-4
RING_RADIUS = 1e-2
RING_NODES = 16


@dataclass(frozen=True)
class EMParams:
    """Euler-Maclaurin cutoff ``N = max(n_min, ceil(n_per_t * |t|))`` and order M."""

    n_min: int = 50
    n_per_t: float = 2.0
    order: int = 12

    def cutoffs(self, s: np.ndarray) -> np.ndarray:
        return np.maximum(self.n_min, np.ceil(self.n_per_t * np.abs(s.imag))).astype(np.int64)

    def refined(self) -> "EMParams":
        return EMParams(self.n_min * 2, self.n_per_t * 2, self.order + 2)


@lru_cache(maxsize=None)
def _bernoulli_coeffs(order: int) -> np.ndarray:
    b = bernoulli(2 * (order + 1))
    return np.array([b[2 * j] / math.factorial(2 * j) for j in range(1, order + 2)])


@dataclass(frozen=True)
class EvaluationResult:
    value: complex
    error_bound: float
    terms_used: int
    truncation_only: bool = False

    def __complex__(self) -> complex:
        return self.value


def _as_array(s) -> tuple[np.ndarray, bool]:
    arr = np.asarray(s, dtype=np.complex128)
    return arr.reshape(-1), arr.ndim == 0


def hurwitz_batch(s, a: float, params: EMParams = EMParams()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """zeta(s, a) at an array of points: (values, error estimates, terms used)."""
    s, _ = _as_array(s)
    if not 0 < a <= 1:
        raise ValueError(f"Hurwitz shift must lie in (0, 1], got {a}")
    if np.any(np.abs(s - 1) < POLE_EPS):
        raise PoleAtOne(complex(s[np.abs(s - 1) < POLE_EPS][0]))
    n = params.cutoffs(s)
    vals, err = kernels.hurwitz_em(s, float(a), n, _bernoulli_coeffs(params.order))
    return vals, err + _rounding_bound(s, a, n, vals), n


def _power_sum(a: float, n: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Estimate of sum_{k<N} (k+a)^-p as a^-p plus the integral over [0, N]."""
    nn = n.astype(float)
    one = np.abs(1 - p) < 1e-9
    q = np.where(one, 0.5, 1 - p)
    integral = np.where(one, np.log((nn + a) / a), ((nn + a) ** q - a**q) / q)
    return a ** (-p) + integral


def _rounding_bound(s: np.ndarray, a: float, n: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Rounding estimate: ROUND_EPS times the summed term sizes, plus phase
    errors of size |s| log(k+a) per term adding up like a random walk."""
    sig = s.real
    plain = _power_sum(a, n, sig)
    square = _power_sum(a, n, 2 * sig)
    phase = np.abs(s) * np.log(n + a) * np.sqrt(square)
    tail = np.abs(s) * (n + a) ** (-sig)
    return ROUND_EPS * (plain + phase + tail + np.abs(vals))


def hurwitz_zeta(s: complex, a: float = 1.0, params: EMParams = EMParams()) -> EvaluationResult:
    """Hurwitz zeta(s, a) for a in (0, 1] by Euler-Maclaurin summation.

    ``error_bound`` is the size of the first omitted correction term plus a
    rounding estimate proportional to the summed term sizes; it is a
    heuristic, not a rigorous bound.
    """
    v, e, n = hurwitz_batch(np.array([s]), a, params)
    return EvaluationResult(complex(v[0]), float(e[0]), int(n[0]))


def reflection(s):
    """sigma + i t  ->  (1 - sigma) + i t."""
    return 1 - np.conj(s) if isinstance(s, np.ndarray) else 1 - complex(s).conjugate()


# ---------------------------------------------------------------------------
# functional equations


@dataclass(frozen=True)
class FunctionalEquationForm:
    """M(s) = epsilon * (q/pi)^(1/2 - s) * Gamma((1 - s + k)/2) / Gamma((s + k)/2).

    With this M, f(s) = M(s) * conj(f(conj(1 - s))). For zeta (q = 1, k = 0,
    epsilon = 1) this is the familiar 2^s pi^(s-1) sin(pi s/2) Gamma(1 - s).
    """

    epsilon: complex
    conductor: int
    parity: int

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        k = self.parity
        num = (1 - s + k) / 2
        den = (s + k) / 2
        logm = (0.5 - s) * math.log(self.conductor / math.pi) + loggamma(num) - loggamma(den)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.epsilon * np.exp(logm)
        # 1/Gamma vanishes at non-positive integers: trivial zeros of M
        den_pole = (np.abs(den.imag) < 1e-14) & (den.real <= 0) & (np.abs(den.real - np.round(den.real)) < 1e-14)
        out = np.where(den_pole, 0.0, out)
        return out

    def log_derivative(self, s) -> np.ndarray:
        """M'(s)/M(s)."""
        s = np.asarray(s, dtype=np.complex128)
        k = self.parity
        return -math.log(self.conductor / math.pi) - 0.5 * psi((1 - s + k) / 2) - 0.5 * psi((s + k) / 2)

    def describe(self) -> str:
        eps = self.epsilon
        return (
            f"M(s) = ({eps.real:.12g}{eps.imag:+.12g}i) * ({self.conductor}/pi)^(1/2-s)"
            f" * Gamma((1-s+{self.parity})/2) / Gamma((s+{self.parity})/2)"
        )


def root_number(chi: DirichletCharacter) -> complex:
    """epsilon(chi) = tau(chi) / (i^k sqrt(q)) for a primitive character."""
    k = chi.parity
    return chi.gauss_sum() / ((1j) ** k * math.sqrt(chi.modulus))


# ---------------------------------------------------------------------------
# handles


@dataclass(frozen=True)
class FunctionHandle:
    """An evaluable analytic function.

    ``terms`` lists (weight, character) pairs; the function is
    sum_w w * L(s, chi). A Hurwitz handle instead sets ``hurwitz_a``, and a
    truncated general series sets ``spec``/``n_trunc``.
    """

    kind: str
    descriptor: str
    terms: tuple[tuple[complex, DirichletCharacter], ...] = ()
    hurwitz_a: float | None = None
    spec: SeriesSpec | None = None
    n_trunc: int = 0
    params: EMParams = field(default_factory=EMParams)
    fe: FunctionalEquationForm | None = None
    pole_at_one: bool = False
    sigma_c: float | None = None

    # -- evaluation --------------------------------------------------------

    def __call__(self, s):
        vals, _, _ = self.evaluate_many(s)
        return vals

    def evaluate_many(self, s) -> tuple:
        """Values, error estimates and term counts; scalar in, scalar out."""
        arr, scalar = _as_array(s)
        if self.pole_at_one and np.any(np.abs(arr - 1) < POLE_EPS):
            raise PoleAtOne(complex(arr[np.abs(arr - 1) < POLE_EPS][0]))
        vals = np.empty(arr.shape, dtype=np.complex128)
        errs = np.empty(arr.shape)
        used = np.empty(arr.shape, dtype=np.int64)
        if self.fe is not None:
            left = arr.real < REFLECT_BELOW
        else:
            left = np.zeros(arr.shape, dtype=bool)
        right = ~left
        if right.any():
            vals[right], errs[right], used[right] = self._direct(arr[right])
        if left.any():
            sl = arr[left]
            w = np.conj(1 - sl)
            v, e, n = self._direct(w)
            m = self.fe(sl)
            vals[left] = m * np.conj(v)
            errs[left] = np.abs(m) * e
            used[left] = n
        if scalar:
            return complex(vals[0]), float(errs[0]), int(used[0])
        return vals, errs, used

    def value_and_derivative(self, s):
        """f and f' from the differentiated Euler-Maclaurin sums (no quadrature)."""
        arr, scalar = _as_array(s)
        if self.pole_at_one and np.any(np.abs(arr - 1) < POLE_EPS):
            raise PoleAtOne(complex(arr[np.abs(arr - 1) < POLE_EPS][0]))
        vals = np.empty(arr.shape, dtype=np.complex128)
        ders = np.empty(arr.shape, dtype=np.complex128)
        left = arr.real < REFLECT_BELOW if self.fe is not None else np.zeros(arr.shape, dtype=bool)
        right = ~left
        if right.any():
            vals[right], ders[right] = self._direct_d(arr[right])
        if left.any():
            sl = arr[left]
            v, d = self._direct_d(np.conj(1 - sl))
            m = self.fe(sl)
            g = np.conj(v)
            vals[left] = m * g
            # d/ds conj(f(conj(1 - s))) = -conj(f'(conj(1 - s)))
            ders[left] = m * (self.fe.log_derivative(sl) * g - np.conj(d))
        if scalar:
            return complex(vals[0]), complex(ders[0])
        return vals, ders

    def _near_one(self, s: np.ndarray) -> np.ndarray:
        if self.pole_at_one or self.kind == "series" or self.hurwitz_a is not None:
            return np.zeros(s.shape, dtype=bool)
        return np.abs(s - 1) < NEAR_ONE

    def _ring(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """f and f' at points near s = 1 from values on a circle around each point.

        The Hurwitz pieces have cancelling poles at s = 1, so direct
        evaluation there loses all accuracy.
        """
        w = np.exp(2j * np.pi * np.arange(RING_NODES) / RING_NODES)
        vals = self._flat(self._direct_raw)(s[:, None] + RING_RADIUS * w[None, :])[0]
        return vals.mean(axis=1), (vals * np.conj(w)[None, :]).mean(axis=1) / RING_RADIUS

    def _direct_d(self, s: np.ndarray):
        near = self._near_one(s)
        if near.any():
            v = np.empty(s.shape, dtype=np.complex128)
            d = np.empty(s.shape, dtype=np.complex128)
            if (~near).any():
                v[~near], d[~near] = self._direct_d_raw(s[~near])
            v[near], d[near] = self._ring(s[near])
            return v, d
        return self._direct_d_raw(s)

    def _flat(self, fn):
        def call(z):
            out = fn(z.reshape(-1))
            return tuple(np.asarray(o).reshape(z.shape) for o in out)

        return call

    def _direct_d_raw(self, s: np.ndarray):
        if self.kind == "series":
            a = coefficients_upto(self.spec, self.n_trunc)[1:]
            lam = exponents_upto(self.spec, self.n_trunc)[1:]
            terms = a[None, :] * np.exp(-np.outer(s, lam))
            return terms.sum(axis=1), -(terms @ lam)
        bern = _bernoulli_coeffs(self.params.order)
        n = self.params.cutoffs(s)
        if self.hurwitz_a is not None:
            v, d, _ = kernels.hurwitz_em_d(s, self.hurwitz_a, n, bern)
            return v, d
        total = np.zeros(s.shape, dtype=np.complex128)
        dtotal = np.zeros(s.shape, dtype=np.complex128)
        for q, c in sorted(self._residue_weights().items()):
            acc = np.zeros(s.shape, dtype=np.complex128)
            dacc = np.zeros(s.shape, dtype=np.complex128)
            for r in range(1, q + 1):
                cr = c[r % q]
                if cr == 0:
                    continue
                v, d, _ = kernels.hurwitz_em_d(s, r / q, n, bern)
                acc += cr * v
                dacc += cr * d
            if q > 1:
                scale = np.exp(-s * math.log(q))
                total += scale * acc
                dtotal += scale * (dacc - math.log(q) * acc)
            else:
                total += acc
                dtotal += dacc
        return total, dtotal

    def _residue_weights(self) -> dict[int, np.ndarray]:
        by_mod: dict[int, np.ndarray] = {}
        for w, chi in self.terms:
            q = chi.modulus
            c = by_mod.setdefault(q, np.zeros(q, dtype=complex))
            c += w * np.asarray(chi.values, dtype=complex)
        return by_mod

    def _direct(self, s: np.ndarray):
        near = self._near_one(s)
        if near.any():
            v = np.empty(s.shape, dtype=np.complex128)
            e = np.empty(s.shape)
            n = np.empty(s.shape, dtype=np.int64)
            if (~near).any():
                v[~near], e[~near], n[~near] = self._direct_raw(s[~near])
            ring = self._flat(self._direct_raw)
            theta = 2 * np.pi * np.arange(RING_NODES) / RING_NODES
            pts = s[near][:, None] + RING_RADIUS * np.exp(1j * theta)[None, :]
            rv, re_, rn = ring(pts)
            v[near] = rv.mean(axis=1)
            e[near] = re_.max(axis=1)
            n[near] = rn.sum(axis=1)
            return v, e, n
        return self._direct_raw(s)

    def _direct_raw(self, s: np.ndarray):
        if self.kind == "series":
            a = coefficients_upto(self.spec, self.n_trunc)[1:]
            lam = exponents_upto(self.spec, self.n_trunc)[1:]
            vals = np.array([compensated_sum(a * np.exp(-lam * z)) for z in s], dtype=np.complex128)
            return vals, np.zeros(s.shape), np.full(s.shape, self.n_trunc)
        if self.hurwitz_a is not None:
            return hurwitz_batch(s, self.hurwitz_a, self.params)
        # group characters by modulus; one Hurwitz sum per residue class
        by_mod = self._residue_weights()
        total = np.zeros(s.shape, dtype=np.complex128)
        err = np.zeros(s.shape)
        used = np.zeros(s.shape, dtype=np.int64)
        for q, c in sorted(by_mod.items()):
            scale = np.exp(-s * math.log(q)) if q > 1 else 1.0
            for r in range(1, q + 1):
                cr = c[r % q]
                if cr == 0:
                    continue
                v, e, n = hurwitz_batch(s, r / q, self.params)
                total += cr * scale * v
                err += abs(cr) * np.abs(scale) * e
                used += n
        return total, err, used

    def evaluate(self, s: complex) -> EvaluationResult:
        s = complex(s)
        v, e, n = self.evaluate_many(s)
        trunc = False
        if self.kind == "series":
            sc = self.sigma_c if self.sigma_c is not None else 0.0
            trunc = s.real <= sc + 0.5
        return EvaluationResult(v, e, n, trunc)

    def M(self, s):
        if self.fe is None:
            raise NoFunctionalEquation(f"{self.descriptor} has no registered functional equation")
        return self.fe(s)

    def with_params(self, params: EMParams) -> "FunctionHandle":
        from dataclasses import replace

        return replace(self, params=params)


def evaluate(h: FunctionHandle, s: complex) -> EvaluationResult:
    return h.evaluate(s)


# -- constructors --------------------------------------------------------------


def riemann_zeta(params: EMParams = EMParams()) -> FunctionHandle:
    one = DirichletCharacter(1, (1,), "1.0")
    return FunctionHandle(
        "zeta", "zeta", terms=((1.0, one),), params=params,
        fe=FunctionalEquationForm(1.0, 1, 0), pole_at_one=True,
    )


def hurwitz(a: float, params: EMParams = EMParams()) -> FunctionHandle:
    if not 0 < a <= 1:
        raise ValueError(f"Hurwitz shift must lie in (0, 1], got {a}")
    fe = FunctionalEquationForm(1.0, 1, 0) if a == 1 else None
    return FunctionHandle("hurwitz", f"hurwitz:{a:g}", hurwitz_a=float(a), params=params, fe=fe, pole_at_one=True)


def dirichlet_l(chi: DirichletCharacter, params: EMParams = EMParams(), descriptor: str | None = None) -> FunctionHandle:
    if chi.modulus == 1:
        return riemann_zeta(params)
    fe = None
    if not chi.is_principal and chi.is_primitive():
        fe = FunctionalEquationForm(root_number(chi), chi.modulus, chi.parity)
    return FunctionHandle(
        "L", descriptor or f"L:{chi.label}", terms=((1.0, chi),), params=params,
        fe=fe, pole_at_one=chi.is_principal,
    )


DH_KAPPA = (math.sqrt(10 - 2 * math.sqrt(5)) - 2) / (math.sqrt(5) - 1)


def dh_character() -> DirichletCharacter:
    """The character mod 5 with chi(2) = i."""
    return next(c for c in character_table(5) if c(2) == 1j)


def davenport_heilbronn(params: EMParams = EMParams(), kappa: float = DH_KAPPA) -> FunctionHandle:
    """((1 - i kappa)/2) L(s, chi) + ((1 + i kappa)/2) L(s, conj chi), chi mod 5, chi(2) = i."""
    chi = dh_character()
    c = (1 - 1j * kappa) / 2
    eps = c * root_number(chi) / c.conjugate()
    return FunctionHandle(
        "dh", "dh", terms=((c, chi), (c.conjugate(), chi.conjugate())), params=params,
        fe=FunctionalEquationForm(eps, 5, chi.parity),
    )


def truncated_general(spec: SeriesSpec, N: int) -> FunctionHandle:
    sc = spec.sigma_c_estimate
    if sc is None:
        sc = abscissa_of_convergence(spec, max(N, 2)).estimate
    return FunctionHandle("series", f"series:{spec.name}:{N}", spec=spec, n_trunc=N, sigma_c=sc)


def parse_handle(desc: str, params: EMParams = EMParams()) -> FunctionHandle:
    """Parse ``zeta``, ``dh``, ``L:5:2=i``, ``L:5#1``, ``hurwitz:0.25`` or ``series:<file>[:N]``."""
    desc = desc.strip()
    if desc == "zeta":
        return riemann_zeta(params)
    if desc == "dh":
        return davenport_heilbronn(params)
    head, _, rest = desc.partition(":")
    try:
        if head == "hurwitz":
            return hurwitz(float(rest), params)
        if head == "L":
            qtxt, _, sel = rest.partition(":")
            if "#" in qtxt:
                qtxt, idx = qtxt.split("#")
                q = int(qtxt)
                return dirichlet_l(character_table(q)[int(idx)], params, desc)
            q = int(qtxt)
            table = character_table(q)
            if not sel:
                return dirichlet_l(table[0], params, desc)
            n_txt, _, val_txt = sel.partition("=")
            n = int(n_txt)
            target = complex(val_txt.replace("i", "j") if val_txt not in ("i", "-i") else val_txt.replace("i", "1j"))
            matches = [c for c in table if abs(c(n) - target) < 1e-9]
            if len(matches) != 1:
                raise SpecParseError(f"{desc!r} selects {len(matches)} characters mod {q}")
            return dirichlet_l(matches[0], params, desc)
        if head == "series":
            path, _, ntxt = rest.partition(":")
            spec = parse_spec(Path(path).read_text())
            return truncated_general(spec, int(ntxt) if ntxt else 10**4)
    except (ValueError, IndexError, StopIteration) as exc:
        if isinstance(exc, SpecParseError):
            raise
        raise SpecParseError(f"cannot parse handle {desc!r}: {exc}") from exc
    raise SpecParseError(f"unknown handle {desc!r}")


# ---------------------------------------------------------------------------
# derivatives and functional-equation residual


@dataclass(frozen=True)
class CauchyParams:
    radius: float = 1e-3
    nodes: int = 32


def derivative_many(h: FunctionHandle, s, order: int = 1, cp: CauchyParams = CauchyParams()):
    """Cauchy-circle derivative estimates at an array of points."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    arr, scalar = _as_array(s)
    r, K = cp.radius, cp.nodes
    if h.pole_at_one and np.any(np.abs(arr - 1) <= 1.5 * r):
        raise PoleInsideCircle(f"pole at s=1 within the circle of radius {r}")
    theta = 2 * np.pi * np.arange(K) / K
    ring = np.exp(1j * theta)
    pts = arr[:, None] + r * ring[None, :]
    vals = h(pts.reshape(-1)).reshape(pts.shape)
    weights = np.exp(-1j * order * theta)
    d = math.factorial(order) * (vals @ weights) / (K * r**order)
    return complex(d[0]) if scalar else d


def derivative(
    h: FunctionHandle, s: complex, order: int = 1, cp: CauchyParams = CauchyParams(), method: str = "cauchy"
) -> EvaluationResult:
    """f' or f'' at s; ``method="analytic"`` differentiates the sums instead (order 1 only)."""
    if method == "analytic":
        if order != 1:
            raise ValueError("analytic derivative is first order only")
        _, d1 = h.value_and_derivative(complex(s))
        _, err, n = h.evaluate_many(complex(s))
        return EvaluationResult(d1, float(err), int(n))
    d = derivative_many(h, np.array([s]), order, cp)[0]
    # rounding in the node values is amplified by r^-order
    _, err, n = h.evaluate_many(complex(s))
    bound = (err + 1e-16 * max(abs(h(complex(s))), 1.0)) * math.factorial(order) / cp.radius**order
    return EvaluationResult(complex(d), float(bound), int(n))


def functional_equation_residual(h: FunctionHandle, s: complex) -> float:
    """|f(s) - M(s) conj(f(conj(1-s)))| relative to the sum of both magnitudes.

    Both sides are evaluated directly, bypassing the left half-plane reflection,
    so the check is not tautological.
    """
    if h.fe is None:
        raise NoFunctionalEquation(f"{h.descriptor} has no registered functional equation")
    s = complex(s)
    lhs = complex(h._direct(np.array([s]))[0][0])
    w = (1 - s).conjugate()
    rhs = complex(h.M(s)) * complex(h._direct(np.array([w]))[0][0]).conjugate()
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)
