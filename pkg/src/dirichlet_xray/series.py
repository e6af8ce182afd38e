"""General Dirichlet series with totally multiplicative coefficients.

A series is described by its values on primes (``a_p``) and an additive
exponent rule (``lambda_p``); everything else follows by factorization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from .errors import FactorizationBoundError, SpecParseError, VanishingFactor

DEFAULT_FACTOR_BOUND = 10**7
VANISHING_FLOOR = 1e-13

# ---------------------------------------------------------------------------
# sieve

_spf_cache: np.ndarray = np.zeros(2, dtype=np.int32)


def smallest_prime_factors(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> np.ndarray:
    """Return an array ``spf`` with ``spf[k]`` the smallest prime factor of k, for k <= n.

    The table is grown geometrically and shared between calls; entries 0 and 1 are 0.
    """
    global _spf_cache
    if n > bound:
        raise FactorizationBoundError(n, bound)
    if n < len(_spf_cache):
        return _spf_cache
    size = min(bound, max(n, 2 * len(_spf_cache), 1024)) + 1
    spf = np.zeros(size, dtype=np.int32)
    for p in range(2, math.isqrt(size - 1) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    _spf_cache = spf
    return spf


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    spf = smallest_prime_factors(n)
    idx = np.arange(2, n + 1)
    return idx[spf[2 : n + 1] == idx].astype(np.int64)


def factorize(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> list[tuple[int, int]]:
    """Prime factorization of n as ``[(p, alpha), ...]`` in increasing p."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    spf = smallest_prime_factors(n, bound)
    out: list[tuple[int, int]] = []
    while n > 1:
        p = int(spf[n])
        alpha = 0
        while n % p == 0:
            n //= p
            alpha += 1
        out.append((p, alpha))
    return out


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character given by its table on residues ``0..q-1``."""

    modulus: int
    values: tuple[complex, ...]
    label: str = ""

    def __call__(self, n: int) -> complex:
        return self.values[n % self.modulus]

    def table(self, n: np.ndarray) -> np.ndarray:
        return np.asarray(self.values, dtype=complex)[np.asarray(n) % self.modulus]

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.modulus, tuple(v.conjugate() for v in self.values), self.label + "*"
        )

    @property
    def is_principal(self) -> bool:
        return all(v == 0 or v == 1 for v in self.values)

    @property
    def parity(self) -> int:
        """0 for even characters, 1 for odd ones."""
        if self.modulus <= 2:
            return 0
        return 0 if abs(self(-1) - 1) < 1e-12 else 1

    def is_primitive(self) -> bool:
        q = self.modulus
        for d in range(1, q):
            if q % d:
                continue
            # induced from modulus d iff chi(n) = 1 whenever n = 1 mod d, gcd(n, q) = 1
            if all(abs(self(n) - 1) < 1e-12 for n in range(1, q) if (n - 1) % d == 0 and math.gcd(n, q) == 1):
                return False
        return True

    def gauss_sum(self) -> complex:
        q = self.modulus
        return sum(self(a) * cmath.exp(2j * math.pi * a / q) for a in range(q))


def _root_of_unity(k: int, m: int) -> complex:
    # exact values at the quarter turns keep tables free of 1e-17 noise
    k %= m
    if (4 * k) % m == 0:
        return (1, 1j, -1, -1j)[4 * k // m]
    return cmath.exp(2j * math.pi * k / m)


def _primitive_root(q: int) -> int:
    units = [a for a in range(1, q) if math.gcd(a, q) == 1]
    order = len(units)
    for g in range(2, q):
        if math.gcd(g, q) != 1:
            continue
        x, k = g, 1
        while x != 1:
            x = x * g % q
            k += 1
        if k == order:
            return g
    raise ValueError(f"(Z/{q})* is not cyclic")


def _is_cyclic_modulus(q: int) -> bool:
    if q in (1, 2, 4):
        return True
    m = q // 2 if q % 2 == 0 else q
    if m % 2 == 0:
        return False
    f = factorize(m)
    return len(f) == 1


def character_table(q: int, bound: int = 10**5) -> list[DirichletCharacter]:
    """All Dirichlet characters modulo q.

    Supported moduli have a cyclic unit group (1, 2, 4, p^k, 2p^k), plus q = 8.
    For cyclic groups with primitive root g the j-th character sends g to
    ``exp(2 pi i j / phi(q))``; index 0 is the principal character.
    """
    if q < 1 or q > bound:
        raise ValueError(f"modulus {q} outside [1, {bound}]")
    if q == 1:
        return [DirichletCharacter(1, (1,), "1.0")]
    if q == 8:
        # (Z/8)* = {1,3,5,7} ~ C2 x C2, generated by 3 and 5
        rows = []
        for j, (e3, e5) in enumerate(((1, 1), (-1, 1), (1, -1), (-1, -1))):
            vals = [0] * 8
            vals[1], vals[3], vals[5], vals[7] = 1, e3, e5, e3 * e5
            rows.append(DirichletCharacter(8, tuple(complex(v) for v in vals), f"8.{j}"))
        return rows
    if not _is_cyclic_modulus(q):
        raise ValueError(f"modulus {q} has a non-cyclic unit group; only q=8 is tabulated")
    g = _primitive_root(q) if q > 2 else 1
    phi = sum(1 for a in range(1, q) if math.gcd(a, q) == 1)
    # discrete log table
    dlog = {}
    x = 1
    for k in range(phi):
        dlog[x] = k
        x = x * g % q
    out = []
    for j in range(phi):
        vals = [0j] * q
        for a, k in dlog.items():
            vals[a] = complex(_root_of_unity(j * k, phi))
        out.append(DirichletCharacter(q, tuple(vals), f"{q}.{j}"))
    return out


# ---------------------------------------------------------------------------
# coefficient and exponent rules

PrimeDefault = Union[complex, DirichletCharacter, Callable[[int], complex]]


@dataclass(frozen=True)
class PrimeCoefficientMap:
    """Values ``a_p`` on primes; ``a_1 = 1`` is implied."""

    values: Mapping[int, complex] = field(default_factory=dict)
    default: PrimeDefault = 1.0

    def at_prime(self, p: int) -> complex:
        if p in self.values:
            return complex(self.values[p])
        d = self.default
        if isinstance(d, DirichletCharacter):
            return complex(d(p))
        if callable(d):
            return complex(d(p))
        return complex(d)

    def at_primes(self, primes: np.ndarray) -> np.ndarray:
        primes = np.asarray(primes, dtype=np.int64)
        d = self.default
        if isinstance(d, DirichletCharacter):
            out = d.table(primes)
        elif callable(d):
            out = np.array([complex(d(int(p))) for p in primes], dtype=complex)
        else:
            out = np.full(primes.shape, complex(d))
        for p, v in self.values.items():
            out[primes == p] = v
        return out


@dataclass(frozen=True)
class LogRule:
    """lambda_n = ln n."""

    def at_prime(self, p: int) -> float:
        return math.log(p)


@dataclass(frozen=True)
class ExplicitPrimeExponents:
    """Explicit lambda_p; primes not listed fall back to ln p."""

    values: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for p, lam in self.values.items():
            if lam < 0:
                raise ValueError(f"lambda_{p} = {lam} is negative")

    def at_prime(self, p: int) -> float:
        return float(self.values.get(p, math.log(p)))


ExponentRule = Union[LogRule, ExplicitPrimeExponents]


@dataclass(frozen=True)
class SeriesSpec:
    coefficients: PrimeCoefficientMap = field(default_factory=PrimeCoefficientMap)
    exponents: ExponentRule = field(default_factory=LogRule)
    name: str = "series"
    sigma_c_estimate: float | None = None

    def with_sigma_c(self, N: int = 10**5) -> "SeriesSpec":
        from dataclasses import replace

        return replace(self, sigma_c_estimate=abscissa_of_convergence(self, N).estimate)


def zeta_spec() -> SeriesSpec:
    return SeriesSpec(PrimeCoefficientMap(default=1.0), LogRule(), "zeta")


def character_spec(chi: DirichletCharacter) -> SeriesSpec:
    return SeriesSpec(PrimeCoefficientMap(default=chi), LogRule(), f"L({chi.label})")


# ---------------------------------------------------------------------------
# coefficient/exponent arrays


def coefficient(spec: SeriesSpec, n: int) -> complex:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = 1 + 0j
    for p, alpha in factorize(n):
        out *= spec.coefficients.at_prime(p) ** alpha
    return out


def exponent(spec: SeriesSpec, n: int) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if isinstance(spec.exponents, LogRule):
        return math.log(n)
    return math.fsum(alpha * spec.exponents.at_prime(p) for p, alpha in factorize(n))


def coefficients_upto(spec: SeriesSpec, N: int) -> np.ndarray:
    """Array ``a`` of length N+1 with ``a[n] = a_n`` (``a[0] = 0``)."""
    spf = smallest_prime_factors(N)
    primes = primes_up_to(N)
    ap = np.zeros(N + 1, dtype=complex)
    ap[primes] = spec.coefficients.at_primes(primes)
    n = np.arange(N + 1)
    a = np.ones(N + 1, dtype=complex)
    rem = n.copy()
    rem[0] = 1
    # peel one prime factor per pass; at most log2(N) passes
    while True:
        live = rem > 1
        if not live.any():
            break
        p = spf[rem[live]]
        a[live] *= ap[p]
        rem[live] //= p
    a[0] = 0
    return a


def exponents_upto(spec: SeriesSpec, N: int) -> np.ndarray:
    n = np.arange(N + 1)
    if isinstance(spec.exponents, LogRule):
        lam = np.zeros(N + 1)
        lam[1:] = np.log(n[1:])
        return lam
    spf = smallest_prime_factors(N)
    primes = primes_up_to(N)
    lp = np.zeros(N + 1)
    lp[primes] = [spec.exponents.at_prime(int(p)) for p in primes]
    lam = np.zeros(N + 1)
    rem = n.copy()
    rem[0] = 1
    while True:
        live = rem > 1
        if not live.any():
            break
        p = spf[rem[live]]
        lam[live] += lp[p]
        rem[live] //= p
    return lam


def compensated_sum(terms: np.ndarray) -> complex:
    """Correctly rounded sum of complex terms (``math.fsum`` per component)."""
    terms = np.asarray(terms, dtype=complex)
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def series_terms(spec: SeriesSpec, s: complex, N: int, start: int = 1) -> np.ndarray:
    a = coefficients_upto(spec, N)[start:]
    lam = exponents_upto(spec, N)[start:]
    return a * np.exp(-lam * complex(s))


def partial_sum(spec: SeriesSpec, s: complex, N: int) -> complex:
    """Sum of ``a_n exp(-lambda_n s)`` for n = 1..N."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return compensated_sum(series_terms(spec, s, N))


def euler_factors(spec: SeriesSpec, s: complex, P: int) -> tuple[np.ndarray, np.ndarray]:
    """Primes p <= P and the factors ``1 - a_p exp(-lambda_p s)``."""
    primes = primes_up_to(P)
    ap = spec.coefficients.at_primes(primes)
    if isinstance(spec.exponents, LogRule):
        lp = np.log(primes.astype(float))
    else:
        lp = np.array([spec.exponents.at_prime(int(p)) for p in primes])
    return primes, 1.0 - ap * np.exp(-lp * complex(s))


def euler_partial_product(spec: SeriesSpec, s: complex, P: int) -> complex:
    """Product over primes p <= P of ``(1 - a_p exp(-lambda_p s))**-1``."""
    primes, fac = euler_factors(spec, s, P)
    small = np.abs(fac) < VANISHING_FLOOR
    if small.any():
        raise VanishingFactor(int(primes[small][0]), complex(s))
    # sum of logs keeps 10^5+ factors well conditioned; branch cuts cancel in exp
    return complex(np.exp(-compensated_sum(np.log(fac))))


# ---------------------------------------------------------------------------
# abscissa of convergence


@dataclass(frozen=True)
class AbscissaEstimate:
    estimate: float
    raw: float
    bounded_partial_sums: bool
    window: tuple[int, int]
    max_abs_partial_sum: float

    def __float__(self) -> float:
        return self.estimate


def abscissa_of_convergence(spec: SeriesSpec, N: int) -> AbscissaEstimate:
    """Estimate sigma_c = limsup ln|A(n)| / lambda_n with A(n) = a_1 + ... + a_n.

    Over the tail window n in [N/2, N] the running maximum of ln|A(n)| is
    regressed on lambda_n; the slope removes the constant offset that biases
    the plain ratio (ln(n^2/2)/ln n is still 1.94 at n = 10^5). The plain
    windowed sup is kept as ``raw``. Bounded partial sums clamp the estimate to 0.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    a = coefficients_upto(spec, N)
    lam = exponents_upto(spec, N)
    absA = np.abs(np.cumsum(a[1:]))
    lo = max(N // 2, 2)
    n = np.arange(lo, N + 1)
    logA = np.log(np.maximum(absA[n - 1], 1e-300))
    raw = float((logA / lam[n]).max())
    envelope = np.maximum.accumulate(logA)
    x = lam[n]
    if np.ptp(x) > 0:
        slope = float(np.polyfit(x, envelope, 1)[0])
    else:
        slope = raw
    early = float(absA[: max(lo // 8, 1)].max())
    bounded = float(absA.max()) <= 4.0 * max(early, 1.0)
    est = 0.0 if (bounded or slope < 0) else slope
    return AbscissaEstimate(est, raw, bounded, (lo, N), float(absA.max()))


# ---------------------------------------------------------------------------
# key=value spec blocks


def parse_spec(text: str) -> SeriesSpec:
    """Build a SeriesSpec from a key=value block.

    Recognised keys: ``kind`` (zeta|character|custom), ``modulus``,
    ``character_index``, ``exponents`` (log|explicit), ``name``; lines of the
    form ``p=re,im`` override a_p and ``lambda.p=x`` set explicit exponents.
    """
    fields: dict[str, str] = {}
    overrides: dict[int, complex] = {}
    lambdas: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecParseError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        try:
            if key.isdigit():
                parts = [float(x) for x in val.split(",")]
                if len(parts) == 1:
                    parts.append(0.0)
                if len(parts) != 2:
                    raise ValueError(val)
                overrides[int(key)] = complex(parts[0], parts[1])
            elif key.startswith("lambda."):
                lambdas[int(key[len("lambda.") :])] = float(val)
            else:
                fields[key] = val
        except ValueError as exc:
            raise SpecParseError(f"line {lineno}: bad value {val!r}") from exc
    for p in list(overrides) + list(lambdas):
        if len(factorize(p)) != 1 or factorize(p)[0][1] != 1:
            raise SpecParseError(f"{p} is not prime")
    kind = fields.get("kind", "custom")
    if kind == "zeta":
        default: PrimeDefault = 1.0
    elif kind == "character":
        q = int(fields.get("modulus", "1"))
        idx = int(fields.get("character_index", "0"))
        table = character_table(q)
        if not 0 <= idx < len(table):
            raise SpecParseError(f"character_index {idx} out of range for modulus {q}")
        default = table[idx]
    elif kind == "custom":
        default = complex(fields.get("default", "1").replace("i", "j"))
    else:
        raise SpecParseError(f"unknown kind {kind!r}")
    rule = fields.get("exponents", "explicit" if lambdas else "log")
    if rule == "log":
        if lambdas:
            raise SpecParseError("lambda.p lines need exponents=explicit")
        exps: ExponentRule = LogRule()
    elif rule == "explicit":
        exps = ExplicitPrimeExponents(lambdas)
    else:
        raise SpecParseError(f"unknown exponent rule {rule!r}")
    return SeriesSpec(PrimeCoefficientMap(overrides, default), exps, fields.get("name", kind))
