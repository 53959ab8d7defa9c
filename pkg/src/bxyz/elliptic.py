"""Elliptic special functions: Jacobi theta series, multi-base q-products,
the elliptic bracket [u], and Jacobi sn/cn/dn with hyperbolic variants.

Conventions: theta functions take a reduced argument u with quasi-period 1
(the classical argument is pi*u) and a modular parameter tau with Im(tau) > 0,
nome q = exp(i*pi*tau).  Index 0 is the conventional alias of index 4.

All x-powers of complex exponents are evaluated as exp(-epsilon*a), which is
entire in a; no complex power branch cuts enter any formula here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "ModelParams",
    "TauParam",
    "EllipticModulus",
    "TruncationConfig",
    "DEFAULT_TRUNC",
    "PoleError",
    "theta",
    "qpoch",
    "theta_p",
    "bracket",
    "h1",
    "h4",
    "h1_theta",
    "h4_theta",
    "fr1",
    "fr4",
    "bracket_constant",
    "elliptic_fns",
    "modulus_from_nome",
    "EllipticFns",
]


class PoleError(ValueError):
    """Raised when a function is evaluated at (or too close to) a pole."""


@dataclass(frozen=True)
class TruncationConfig:
    """Cutoffs for infinite products and theta series."""

    product_tol: float = 1e-16
    theta_tol: float = 1e-16
    max_terms: int = 200

    def __post_init__(self):
        for name in ("product_tol", "theta_tol"):
            tol = getattr(self, name)
            if not (0.0 < tol <= 1e-6):
                raise ValueError(f"{name} must lie in (0, 1e-6], got {tol}")
        if self.max_terms < 8:
            raise ValueError("max_terms must be >= 8")


DEFAULT_TRUNC = TruncationConfig()


@dataclass(frozen=True)
class ModelParams:
    """Bulk parameters of the principal regime.

    epsilon > 0 and r > 1 fix x = e^{-epsilon}, the base nome p = x^{2r}
    and the dual level r_star = r - 1.
    """

    epsilon: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and math.isfinite(self.r)):
            raise ValueError("epsilon and r must be finite")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.r <= 1:
            raise ValueError(f"r must be > 1, got {self.r}")

    @property
    def x(self) -> float:
        return math.exp(-self.epsilon)

    @property
    def p(self) -> float:
        return math.exp(-2.0 * self.r * self.epsilon)

    @property
    def r_star(self) -> float:
        return self.r - 1.0

    def xpow(self, a):
        """x**a = exp(-epsilon*a); entire in the exponent (no branch cut)."""
        if isinstance(a, np.ndarray):
            return np.exp(-self.epsilon * a)
        if isinstance(a, complex):
            return cmath.exp(-self.epsilon * a)
        return math.exp(-self.epsilon * a)


@dataclass(frozen=True)
class TauParam:
    """Modular parameter tau (Im tau > 0) with nome q = exp(i*pi*tau)."""

    tau: complex

    def __post_init__(self):
        if not complex(self.tau).imag > 0:
            raise ValueError(f"Im(tau) must be > 0, got {self.tau}")

    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi * complex(self.tau))


def _as_nome(tau) -> complex:
    if isinstance(tau, TauParam):
        return tau.q
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"Im(tau) must be > 0, got {tau}")
    return cmath.exp(1j * math.pi * tau)


def theta(index: int, u, tau, cfg: TruncationConfig = DEFAULT_TRUNC):
    """Jacobi theta function theta_index(u; tau), reduced argument (period 1).

    theta1(u) = 2 sum (-1)^n q^{(n+1/2)^2} sin((2n+1) pi u)
    theta2(u) = 2 sum q^{(n+1/2)^2} cos((2n+1) pi u)
    theta3(u) = 1 + 2 sum q^{n^2} cos(2n pi u)
    theta4(u) = 1 + 2 sum (-1)^n q^{n^2} cos(2n pi u);  theta0 = theta4.

    The series is truncated once the dropped tail is below cfg.theta_tol
    relative to the accumulated magnitude.
    """
    if index not in (0, 1, 2, 3, 4):
        raise ValueError(f"theta index must be 0..4, got {index}")
    q = _as_nome(tau)
    if abs(q) >= 1.0 - 1e-6:
        raise ValueError(f"nome |q| = {abs(q):.6g} too close to 1; series not certified")
    if index == 0:
        index = 4
    u = complex(u)
    piu = math.pi * u
    aq = abs(q)
    im = abs(piu.imag)

    acc = 0.0 + 0.0j
    ref = 0.0
    if index in (3, 4):
        acc = 1.0 + 0.0j
        ref = 1.0
    small = 0
    for n in range(cfg.max_terms):
        if index in (1, 2):
            mag = 2.0 * aq ** ((n + 0.5) ** 2) * math.exp((2 * n + 1) * im)
            arg = (2 * n + 1) * piu
            term = 2.0 * q ** ((n + 0.5) ** 2) * (((-1) ** n) * cmath.sin(arg) if index == 1
                                                  else cmath.cos(arg))
        else:
            m = n + 1
            mag = 2.0 * aq ** (m * m) * math.exp(2 * m * im)
            term = 2.0 * q ** (m * m) * cmath.cos(2 * m * piu)
            if index == 4:
                term *= (-1) ** m
        acc += term
        ref = max(ref, mag)
        # mag bounds the term; once the bound drops below tol relative to the
        # largest bound seen, the remaining tail is negligible
        if mag < cfg.theta_tol * ref:
            small += 1
            if small >= 2:
                return acc
        else:
            small = 0
    raise RuntimeError(f"theta series did not converge in {cfg.max_terms} terms (|q|={abs(q):.4g})")


def _qpoch_single(z, base: float, cfg: TruncationConfig):
    """(z; base)_infty for scalar or ndarray z."""
    zmax = float(np.max(np.abs(z))) if isinstance(z, np.ndarray) else abs(z)
    if zmax == 0.0:
        return np.ones_like(z) if isinstance(z, np.ndarray) else 1.0 + 0.0j
    n_terms = _lattice_depth(zmax, base, cfg.product_tol, cfg.max_terms)
    return _product_over_multipliers(z, [base ** n for n in range(n_terms)])


def _lattice_depth(zmax: float, base: float, tol: float, max_terms: int) -> int:
    if not (0.0 < base < 1.0):
        raise ValueError(f"q-product base must lie in (0,1), got {base}")
    n = int(math.ceil((math.log(tol) - math.log(zmax)) / math.log(base))) if zmax > 0 else 1
    return max(1, min(n, max_terms * 10))


def _product_over_multipliers(z, mults: Iterable[float]):
    """prod_j (1 - z*m_j), splitting large factors from a log1p-summed tail."""
    if isinstance(z, np.ndarray):
        acc = np.ones_like(z, dtype=complex)
        logacc = np.zeros_like(z, dtype=complex)
        for m in mults:
            w = z * m
            big = np.abs(w) > 0.5
            if np.any(big):
                acc = np.where(big, acc * (1.0 - w), acc)
                logacc = logacc + np.log1p(np.where(big, 0.0, -w))
            else:
                logacc = logacc + np.log1p(-w)
        return acc * np.exp(logacc)
    acc = 1.0 + 0.0j
    logacc = 0.0 + 0.0j
    for m in mults:
        w = z * m
        if abs(w) > 0.5:
            acc *= 1.0 - w
        else:
            logacc += cmath.log(1.0 - w)  # |w| <= 1/2: principal log is the convergent branch
    return acc * cmath.exp(logacc)


def qpoch(z, bases, cfg: TruncationConfig = DEFAULT_TRUNC):
    """Multi-base infinite product (z; p_1, ..., p_N)_infty.

    prod over n_1..n_N >= 0 of (1 - z p_1^{n_1} ... p_N^{n_N}), truncated on
    the index lattice where |z| p_1^{n_1}...p_N^{n_N} >= product_tol.  Exact
    zeros (some factor equal to 1 - z*m = 0) propagate as an exact 0.
    """
    bases = [float(b) for b in (bases if isinstance(bases, (list, tuple)) else [bases])]
    for b in bases:
        if not (0.0 < b < 1.0):
            raise ValueError(f"q-product base must lie in (0,1), got {b}")
    if len(bases) == 1:
        return _qpoch_single(z, bases[0], cfg)

    zmax = float(np.max(np.abs(z))) if isinstance(z, np.ndarray) else abs(z)
    if zmax == 0.0:
        return np.ones_like(z) if isinstance(z, np.ndarray) else 1.0 + 0.0j
    mults: list[float] = []

    def walk(i: int, m: float):
        if i == len(bases):
            mults.append(m)
            return
        b = bases[i]
        while zmax * m >= cfg.product_tol:
            walk(i + 1, m)
            m *= b
            if len(mults) > 2_000_000:
                raise RuntimeError("q-product lattice truncation exploded; check bases")

    walk(0, 1.0)
    return _product_over_multipliers(z, mults)


@lru_cache(maxsize=256)
def _euler_product(p: float, tol: float) -> float:
    """(p; p)_infty for real p in (0,1)."""
    acc = 1.0
    m = p
    while m >= tol:
        acc *= 1.0 - m
        m *= p
    return acc


def theta_p(z, p: float, cfg: TruncationConfig = DEFAULT_TRUNC):
    """Multiplicative theta function  (z;p)(p/z;p)(p;p), 0 < p < 1, z != 0.

    Vanishes exactly at z = p^n, n integer; satisfies theta_p(p/z) = theta_p(z).
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"theta_p base must lie in (0,1), got {p}")
    if isinstance(z, np.ndarray):
        if np.any(z == 0):
            raise ZeroDivisionError("theta_p requires z != 0")
        return (_qpoch_single(z, p, cfg) * _qpoch_single(p / z, p, cfg)
                * _euler_product(p, cfg.product_tol))
    z = complex(z)
    if z == 0:
        raise ZeroDivisionError("theta_p requires z != 0")
    return (_qpoch_single(z, p, cfg) * _qpoch_single(p / z, p, cfg)
            * _euler_product(p, cfg.product_tol))


# ---------------------------------------------------------------------------
# The elliptic bracket [u] and its companions

def fr1(u, mp: ModelParams):
    """Monomial prefactor x^{u^2/r - u} of the bracket."""
    return mp.xpow(np.asarray(u) ** 2 / mp.r - u) if isinstance(u, np.ndarray) \
        else mp.xpow(u * u / mp.r - u)


def fr4(u, mp: ModelParams):
    """Companion monomial exp(-pi^2/(4 r epsilon) - i pi u / r)."""
    e, r = mp.epsilon, mp.r
    c = math.exp(-math.pi ** 2 / (4.0 * r * e))
    if isinstance(u, np.ndarray):
        return c * np.exp(-1j * math.pi * u / r)
    return c * cmath.exp(-1j * math.pi * complex(u) / r)


def bracket(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC):
    """The bracket [u] = x^{u^2/r - u} * theta_{x^{2r}}(x^{2u}).

    Odd in u, vanishes at u in r*Z + (i pi / epsilon)*Z, and satisfies
    [u + r] = -[u].  Equals sqrt(pi/(epsilon r)) e^{epsilon r/4}
    theta1(u/r; i pi/(epsilon r)).
    """
    return fr1(u, mp) * theta_p(mp.xpow(2.0 * np.asarray(u)) if isinstance(u, np.ndarray)
                                else mp.xpow(2.0 * u), mp.p, cfg)


def h4(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC):
    """Even companion of the bracket: x^{u^2/r - u} * theta_{x^{2r}}(-x^{2u}).

    Nonvanishing for real u; equals sqrt(pi/(epsilon r)) e^{epsilon r/4}
    theta4(u/r; i pi/(epsilon r)) (the series route, kept as a cross-check).
    """
    z = mp.xpow(2.0 * np.asarray(u)) if isinstance(u, np.ndarray) else mp.xpow(2.0 * u)
    return fr1(u, mp) * theta_p(-z, mp.p, cfg)


def bracket_constant(mp: ModelParams) -> float:
    """sqrt(pi/(epsilon r)) * e^{epsilon r / 4}, the theta-route normalization."""
    return math.sqrt(math.pi / (mp.epsilon * mp.r)) * math.exp(mp.epsilon * mp.r / 4.0)


def h1_theta(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC) -> complex:
    """Theta-series route for [u]; independent of the product route."""
    tau = 1j * math.pi / (mp.epsilon * mp.r)
    return bracket_constant(mp) * theta(1, complex(u) / mp.r, tau, cfg)


def h4_theta(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC) -> complex:
    """Theta-series route for h4."""
    tau = 1j * math.pi / (mp.epsilon * mp.r)
    return bracket_constant(mp) * theta(4, complex(u) / mp.r, tau, cfg)


def h1(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC):
    """Alias of bracket(u); the two names coexist in the weight formulas."""
    return bracket(u, mp, cfg)


# ---------------------------------------------------------------------------
# Elliptic moduli and Jacobi functions

@dataclass(frozen=True)
class EllipticModulus:
    """Modulus pair (k, k') with quarter periods (K, K') and real nome."""

    k: float
    k_prime: float
    K: float
    K_prime: float
    nome: float

    def __post_init__(self):
        if not (0.0 < self.k < 1.0):
            raise ValueError(f"modulus k must lie in (0,1), got {self.k}")
        if abs(self.k ** 2 + self.k_prime ** 2 - 1.0) > 1e-12:
            raise ValueError("k^2 + k'^2 deviates from 1 beyond 1e-12")
        if abs(self.nome - math.exp(-math.pi * self.K_prime / self.K)) > 1e-10:
            raise ValueError("nome inconsistent with exp(-pi K'/K) beyond 1e-10")


def modulus_from_nome(nome: float, cfg: TruncationConfig = DEFAULT_TRUNC) -> EllipticModulus:
    """Build the consistent (k, k', K, K') tuple from a real nome in (0,1)."""
    if not (0.0 < nome < 1.0):
        raise ValueError(f"nome must lie in (0,1), got {nome}")
    t2 = theta(2, 0.0, TauParam(1j * (-math.log(nome)) / math.pi), cfg).real
    t3 = theta(3, 0.0, TauParam(1j * (-math.log(nome)) / math.pi), cfg).real
    t4 = theta(4, 0.0, TauParam(1j * (-math.log(nome)) / math.pi), cfg).real
    k = (t2 / t3) ** 2
    k_prime = (t4 / t3) ** 2
    K = 0.5 * math.pi * t3 ** 2
    K_prime = K * (-math.log(nome)) / math.pi
    return EllipticModulus(k=k, k_prime=k_prime, K=K, K_prime=K_prime, nome=nome)


class EllipticFns(NamedTuple):
    sn: complex
    cn: complex
    dn: complex
    snh: complex
    cnh: complex
    dnh: complex


def _sn_cn_dn(u: complex, em: EllipticModulus, cfg: TruncationConfig) -> tuple[complex, complex, complex]:
    tau = TauParam(1j * em.K_prime / em.K)
    v = complex(u) / (2.0 * em.K)
    t2z, t3z, t4z = (theta(i, 0.0, tau, cfg) for i in (2, 3, 4))
    t1, t2, t3, t4 = (theta(i, v, tau, cfg) for i in (1, 2, 3, 4))
    if abs(t4) < 1e-13 * max(abs(t1), abs(t2), abs(t3), 1e-300):
        raise PoleError(f"sn/cn/dn pole at u = {u} (u = i K' mod lattice)")
    sn = (t3z / t2z) * (t1 / t4)
    cn = (t4z / t2z) * (t2 / t4)
    dn = (t4z / t3z) * (t3 / t4)
    return sn, cn, dn


def elliptic_fns(u, em: EllipticModulus, cfg: TruncationConfig = DEFAULT_TRUNC) -> EllipticFns:
    """Jacobi sn, cn, dn at u together with snh(u) = -i sn(iu), cnh = cn(iu),
    dnh = dn(iu), all via theta quotients at the modulus' nome."""
    u = complex(u)
    sn, cn, dn = _sn_cn_dn(u, em, cfg)
    snh_, cnh_, dnh_ = _sn_cn_dn(1j * u, em, cfg)
    return EllipticFns(sn=sn, cn=cn, dn=dn, snh=-1j * snh_, cnh=cnh_, dnh=dnh_)
