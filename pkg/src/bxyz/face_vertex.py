"""Intertwining vectors and the face-vertex correspondence: bulk weights,
the boundary reflection matrix of vertex type built from the diagonal face
one, its explicit closed form, the diagonal specialization, and the map onto
the general elliptic solution of the boundary Yang-Baxter equation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import (
    DEFAULT_TRUNC,
    ModelParams,
    TruncationConfig,
    bracket,
    bracket_constant,
    elliptic_fns,
    h1,
    h4,
    modulus_from_nome,
    theta,
)
from .sos import FaceConfig, k_diagonal_entry, w_face
from .vertex import r_matrix

__all__ = [
    "BoundaryParams",
    "VertexK",
    "IKParams",
    "RouteMismatchError",
    "BranchResolutionError",
    "intertwiner",
    "intertwiner_constant",
    "vec_relations_residual",
    "fv_rw_residual",
    "kbracket",
    "kbracket_residual",
    "vertex_k_from_face",
    "vertex_k_explicit",
    "vertex_k_summed",
    "boundary_ybe_residual",
    "diagonal_specialization",
    "diagonal_boundary_params",
    "diagonal_snh_ratio",
    "ik_correspondence",
]


class RouteMismatchError(RuntimeError):
    """Summed and explicit constructions of the vertex K disagree."""


class BranchResolutionError(RuntimeError):
    """No square-root/logarithm branch reproduces the explicit K matrix."""


@dataclass(frozen=True)
class BoundaryParams:
    """Boundary data (c, l, u0) of the vertex reflection matrix.

    delta = 1 - u0 and zeta0 = x^{2 u0} are derived; l is an integer for the
    summed construction and may be continued off the integers through the
    explicit one.
    """

    c: complex
    l: complex
    u0: complex

    @property
    def delta(self) -> complex:
        return 1.0 - complex(self.u0)

    def zeta0(self, mp: ModelParams) -> complex:
        return mp.xpow(2.0 * complex(self.u0))

    def l_is_integer(self) -> bool:
        l = complex(self.l)
        return abs(l.imag) < 1e-12 and abs(l.real - round(l.real)) < 1e-12


@dataclass(frozen=True)
class VertexK:
    """2x2 boundary reflection matrix of vertex type; entry(eps, eps') is the
    weight with incoming spin eps and outgoing spin eps'."""

    matrix: np.ndarray
    route_residual: float = 0.0

    def entry(self, eps: int, eps_p: int) -> complex:
        return self.matrix[(1 - eps) // 2, (1 - eps_p) // 2]


def intertwiner_constant(mp: ModelParams) -> float:
    """Normalization sqrt(pi/(epsilon r)) e^{epsilon r/4} of the dual vectors."""
    return bracket_constant(mp)


def _tau_half(mp: ModelParams) -> complex:
    return 1j * math.pi / (2.0 * mp.epsilon * mp.r)


def _t_base(eps: int, n, n_prime, u, mp: ModelParams, cfg: TruncationConfig) -> complex:
    arg = ((n_prime - n) * u + n_prime) / (2.0 * mp.r)
    if eps == 1:
        return theta(3, arg, _tau_half(mp), cfg) / math.sqrt(2.0)
    return _sign_pow(n) * theta(0, arg, _tau_half(mp), cfg) / math.sqrt(2.0)


def _sign_pow(n) -> complex:
    """(-1)^n continued off the integers as exp(i pi n)."""
    if isinstance(n, int) or (isinstance(n, float) and n.is_integer()):
        return -1.0 if int(n) % 2 else 1.0
    return cmath.exp(1j * math.pi * complex(n))


def intertwiner(kind: str, eps: int, n, n_prime, u, mp: ModelParams,
                cfg: TruncationConfig = DEFAULT_TRUNC) -> complex:
    """Intertwining vector component of the requested kind at spin eps with
    height step n -> n_prime (|n_prime - n| = 1).

    kind is one of "t", "t_star", "t_prime", "t_prime_star".
    """
    if abs(complex(n_prime) - complex(n) - 1) > 1e-12 and abs(complex(n_prime) - complex(n) + 1) > 1e-12:
        raise ValueError(f"height step must be +-1, got {n} -> {n_prime}")
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    u = complex(u)
    if kind == "t":
        return _t_base(eps, n, n_prime, u, mp, cfg)
    if kind == "t_star":
        bu = bracket(u, mp, cfg)
        if abs(bu) < 1e-250:
            raise ZeroDivisionError(f"dual vector pole: [u] vanishes at u = {u}")
        pref = _sign_pow(n) * bracket_constant(mp) ** 2 * (n_prime - n) / (bracket(n, mp, cfg) * bu)
        return pref * _t_base(-eps, n, n_prime, u - 1.0, mp, cfg)
    if kind == "t_prime":
        pref = (bracket(u, mp, cfg) / bracket(u - 1.0, mp, cfg)) \
            * (bracket(n_prime, mp, cfg) / bracket(n, mp, cfg))
        return pref * _t_base(eps, n, n_prime, u - 2.0, mp, cfg)
    if kind == "t_prime_star":
        # bracket ratio fixed by completeness against t_prime
        pref = (bracket(u - 1.0, mp, cfg) * bracket(n_prime, mp, cfg)) \
            / (bracket(u, mp, cfg) * bracket(n, mp, cfg))
        return pref * intertwiner("t_star", eps, n, n_prime, u - 2.0, mp, cfg)
    raise ValueError(f"unknown intertwiner kind {kind!r}")


def vec_relations_residual(u, n: int, mp: ModelParams,
                           cfg: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Worst absolute residual of the six completeness relations between the
    intertwining vectors and their duals at height n."""
    u = complex(u)

    def t(eps, np_, n_):
        return intertwiner("t", eps, n_, np_, u, mp, cfg)

    def ts(eps, np_, n_):
        return intertwiner("t_star", eps, n_, np_, u, mp, cfg)

    def tp(eps, np_, n_):
        return intertwiner("t_prime", eps, n_, np_, u, mp, cfg)

    def tps(eps, np_, n_):
        return intertwiner("t_prime_star", eps, n_, np_, u, mp, cfg)

    worst = 0.0
    # height-space completeness: sum_eps ts(u)^{n'}_n t(u)^n_{n''} = delta
    for np_ in (n - 1, n + 1):
        for npp in (n - 1, n + 1):
            acc = sum(ts(e, np_, n) * t(e, n, npp) for e in (1, -1))
            worst = max(worst, abs(acc - (1.0 if np_ == npp else 0.0)))
            acc = sum(ts(e, n, np_) * tp(e, npp, n) for e in (1, -1))
            worst = max(worst, abs(acc - (1.0 if np_ == npp else 0.0)))
            acc = sum(tps(e, np_, n) * tp(e, n, npp) for e in (1, -1))
            worst = max(worst, abs(acc - (1.0 if np_ == npp else 0.0)))
    # spin-space completeness: sum_{s=n+-1} ts(u)^s_n t(u)^n_s = delta
    for ep in (1, -1):
        for e in (1, -1):
            acc = sum(ts(ep, s, n) * t(e, n, s) for s in (n - 1, n + 1))
            worst = max(worst, abs(acc - (1.0 if ep == e else 0.0)))
            acc = sum(ts(ep, n, s) * tp(e, s, n) for s in (n - 1, n + 1))
            worst = max(worst, abs(acc - (1.0 if ep == e else 0.0)))
            acc = sum(tps(ep, s, n) * tp(e, n, s) for s in (n - 1, n + 1))
            worst = max(worst, abs(acc - (1.0 if ep == e else 0.0)))
    return worst


def _wrel(p, q, r, s, u, mp, cfg) -> complex:
    return w_face(FaceConfig(p, r, q, s, u), mp, cfg)


def fv_rw_residual(u, v, u0, n: int, mp: ModelParams,
                   cfg: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Worst relative residual of the bulk face-vertex correspondence and its
    two dual variants over all external spins and admissible heights near n."""
    u, v, u0 = complex(u), complex(v), complex(u0)
    R = r_matrix(u - v, mp, cfg)

    def _guard(kind):
        def f(eps, np_, n_, w):
            if abs(np_ - n_) != 1:
                return 0.0 + 0.0j  # vector components vanish off unit steps
            return intertwiner(kind, eps, n_, np_, w, mp, cfg)
        return f

    t, ts, tp, tps = map(_guard, ("t", "t_star", "t_prime", "t_prime_star"))

    diffs = [[], [], []]
    scales = [0.0, 0.0, 0.0]
    spins = (1, -1)
    for sp in (n - 1, n + 1):
        for np_ in (sp - 1, sp + 1):
            for e1 in spins:
                for e2 in spins:
                    # variant 1: two direct vectors
                    lhs = sum(R.entry(f1, f2, e1, e2)
                              * t(f1, np_, sp, u0 - u) * t(f2, sp, n, u0 - v)
                              for f1 in spins for f2 in spins)
                    rhs = sum(t(e2, np_, s, u0 - v) * t(e1, s, n, u0 - u)
                              * _wrel(np_, sp, s, n, u - v, mp, cfg)
                              for s in (n - 1, n + 1))
                    diffs[0].append(abs(lhs - rhs))
                    scales[0] = max(scales[0], abs(lhs), abs(rhs))
                    # variant 2: two dual vectors
                    lhs = sum(ts(f2, sp, np_, u0 - v) * ts(f1, n, sp, u0 - u)
                              * R.entry(e1, e2, f1, f2)
                              for f1 in spins for f2 in spins)
                    rhs = sum(_wrel(np_, s, sp, n, u - v, mp, cfg)
                              * ts(e1, s, np_, u0 - u) * ts(e2, n, s, u0 - v)
                              for s in (np_ - 1, np_ + 1))
                    diffs[1].append(abs(lhs - rhs))
                    scales[1] = max(scales[1], abs(lhs), abs(rhs))
                    # variant 3: primed pair with mixed R indices
                    lhs = sum(tps(f2, np_, sp, u0 - v) * R.entry(f1, e2, e1, f2)
                              * tp(f1, sp, n, u0 - u)
                              for f1 in spins for f2 in spins)
                    rhs = sum(tp(e1, np_, s, u0 - u)
                              * _wrel(sp, n, np_, s, u - v, mp, cfg)
                              * tps(e2, s, n, u0 - v)
                              for s in (np_ - 1, np_ + 1))
                    diffs[2].append(abs(lhs - rhs))
                    scales[2] = max(scales[2], abs(lhs), abs(rhs))
    # each variant is normalized by its own largest magnitude so that
    # identically-small components do not masquerade as violations
    return max(max(d) / max(s, 1e-300) for d, s in zip(diffs, scales))


def kbracket(n4, n3, n1, n2, u, mp: ModelParams,
             cfg: TruncationConfig = DEFAULT_TRUNC) -> complex:
    """Closed bilinear kernel of the signed dual pairing.

    For opposite height parities (n1 + n3 odd) this is the quotient of two
    even brackets by [u]; equal parities reduce instead to odd brackets with
    an overall sign (the two cases come from the two halves of the quartic
    theta identity).
    """
    s1 = n2 - n1
    s4 = n3 - n4
    if abs(s1) != 1 or abs(s4) != 1:
        raise ValueError("kbracket needs unit height steps")
    u = complex(u)
    if s4 == s1:
        a1, a2 = u + s1 * (n1 - n4) / 2.0, (n1 + n4) / 2.0
    else:
        a1, a2 = u + s1 * (n1 + n4) / 2.0, (n1 - n4) / 2.0
    if (n1 + n3) % 2:
        return h4(a1, mp, cfg) * h4(a2, mp, cfg) / h1(u, mp, cfg)
    return (n1 - n2) * h1(a1, mp, cfg) * h1(a2, mp, cfg) / h1(u, mp, cfg)


def kbracket_residual(u, n1: int, n3: int, mp: ModelParams,
                      cfg: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Residual of sum_eps eps ts_eps(u)^{n2}_{n1} t_eps(u)^{n4}_{n3} against
    (-1)^{n1+n3} (n1-n2)/[n1] times the closed kernel."""
    u = complex(u)
    worst = 0.0
    for n2 in (n1 - 1, n1 + 1):
        for n4 in (n3 - 1, n3 + 1):
            lhs = sum(e * intertwiner("t_star", e, n1, n2, u, mp, cfg)
                      * intertwiner("t", e, n3, n4, u, mp, cfg)
                      for e in (1, -1))
            rhs = (_sign_pow(n1 + n3) * (n1 - n2) / bracket(n1, mp, cfg)
                   * kbracket(n4, n3, n1, n2, u, mp, cfg))
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return worst


# ---------------------------------------------------------------------------
# Vertex reflection matrix

def vertex_k_summed(u, bp: BoundaryParams, mp: ModelParams,
                    cfg: TruncationConfig = DEFAULT_TRUNC) -> np.ndarray:
    """Vertex reflection matrix as the intertwined sum over the diagonal face
    weights (integer boundary height only)."""
    if not bp.l_is_integer():
        raise ValueError("summed route requires integer l")
    l = int(round(complex(bp.l).real))
    u = complex(u)
    u0, c = complex(bp.u0), complex(bp.c)
    m = np.zeros((2, 2), dtype=complex)
    for i, eps in enumerate((1, -1)):
        for j, eps_p in enumerate((1, -1)):
            acc = 0.0 + 0.0j
            for nu in (1, -1):
                kw = k_diagonal_entry(l + nu, c, l, u, mp, "lt", cfg)
                acc += (intertwiner("t_star", eps, l + nu, l, u0 - u, mp, cfg)
                        * intertwiner("t_prime", eps_p, l, l + nu, u0 + u, mp, cfg)
                        * kw)
            m[i, j] = acc
    return m


def kbar_entries(u, bp: BoundaryParams, mp: ModelParams,
                 cfg: TruncationConfig = DEFAULT_TRUNC) -> np.ndarray:
    """Bare theta-bilinear entries of the vertex reflection matrix (without
    the scalar normalization prefactor); entire in the boundary height."""
    u = complex(u)
    c, l = complex(bp.c), complex(bp.l)
    dl = bp.delta
    r = mp.r
    tau = _tau_half(mp)

    def t3(w):
        return theta(3, w / (2.0 * r), tau, cfg)

    def t0(w):
        return theta(0, w / (2.0 * r), tau, cfg)

    bp_pu = bracket(c + u, mp, cfg) * bracket(l + c - u, mp, cfg)
    bp_mu = bracket(c - u, mp, cfg) * bracket(l + c + u, mp, cfg)
    sl = _sign_pow(l)

    kpp = -t0(u + dl + l) * t3(u - dl + l) * bp_pu + t0(u + dl - l) * t3(u - dl - l) * bp_mu
    kmm = t3(u + dl + l) * t0(u - dl + l) * bp_pu - t3(u + dl - l) * t0(u - dl - l) * bp_mu
    kpm = -sl * t0(u + dl + l) * t0(u - dl + l) * bp_pu + sl * t0(u + dl - l) * t0(u - dl - l) * bp_mu
    kmp = sl * t3(u + dl + l) * t3(u - dl + l) * bp_pu - sl * t3(u + dl - l) * t3(u - dl - l) * bp_mu
    return np.array([[kpp, kpm], [kmp, kmm]], dtype=complex)


def vertex_k_explicit(u, bp: BoundaryParams, mp: ModelParams,
                      cfg: TruncationConfig = DEFAULT_TRUNC) -> np.ndarray:
    """Vertex reflection matrix from its closed theta-bilinear form; entire in
    the boundary height, which may be non-integer."""
    u = complex(u)
    c, l, u0 = complex(bp.c), complex(bp.l), complex(bp.u0)
    from .sos import _h_norm  # normalization shared with the face-side weights

    pref = (bracket_constant(mp) ** 2 * bracket(u0 + u, mp, cfg) * _h_norm(u, c, l, mp, cfg, "lt")
            / (2.0 * bracket(u0 - u, mp, cfg) * bracket(u0 + u - 1.0, mp, cfg)
               * bracket(l, mp, cfg) * bracket(c - u, mp, cfg) * bracket(l + c + u, mp, cfg)))
    return pref * kbar_entries(u, bp, mp, cfg)


def vertex_k_from_face(u, bp: BoundaryParams, mp: ModelParams,
                       cfg: TruncationConfig = DEFAULT_TRUNC,
                       route_tol: float = 1e-9) -> VertexK:
    """Boundary reflection matrix of vertex type.

    For integer boundary height both constructions are evaluated and must
    agree elementwise to route_tol (relative); the explicit form is returned.
    """
    explicit = vertex_k_explicit(u, bp, mp, cfg)
    resid = 0.0
    if bp.l_is_integer() and _summed_route_regular(bp, mp):
        summed = vertex_k_summed(u, bp, mp, cfg)
        scale = max(np.abs(explicit).max(), np.abs(summed).max())
        resid = float(np.abs(explicit - summed).max() / scale)
        if resid > route_tol:
            raise RouteMismatchError(
                f"summed and explicit K disagree: rel diff {resid:.3e} at u={u}")
    return VertexK(matrix=explicit, route_residual=resid)


def _summed_route_regular(bp: BoundaryParams, mp: ModelParams) -> bool:
    """The intertwined sum divides by brackets of the heights l, l+-1, which
    vanish on the r Z lattice; the explicit form stays regular there."""
    l = round(complex(bp.l).real)
    for h in (l - 1, l, l + 1):
        if h == 0 or abs(h - mp.r * round(h / mp.r)) < 1e-9:
            return False
    return True


def boundary_ybe_residual(u1, u2, bp: BoundaryParams, mp: ModelParams,
                          cfg: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Relative residual of the boundary Yang-Baxter equation
    K2(u2) R21(u1+u2) K1(u1) R12(u1-u2) = R21(u1-u2) K1(u1) R12(u1+u2) K2(u2)."""
    u1, u2 = complex(u1), complex(u2)
    k1m = vertex_k_from_face(u1, bp, mp, cfg).matrix
    k2m = vertex_k_from_face(u2, bp, mp, cfg).matrix
    K1 = np.kron(k1m, np.eye(2))
    K2 = np.kron(np.eye(2), k2m)
    P = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            P[2 * a + b, 2 * b + a] = 1.0
    Rd = r_matrix(u1 - u2, mp, cfg).entries
    Rs = r_matrix(u1 + u2, mp, cfg).entries
    lhs = K2 @ (P @ Rs @ P) @ K1 @ Rd
    rhs = (P @ Rd @ P) @ K1 @ Rs @ K2
    scale = max(np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / scale)


def diagonal_boundary_params(c, mp: ModelParams) -> BoundaryParams:
    """Boundary data at which the vertex reflection matrix turns diagonal:
    l = r/2 - c, u0 = 1 - r/2 - i pi/(2 epsilon)."""
    c = complex(c)
    return BoundaryParams(c=c, l=mp.r / 2.0 - c,
                          u0=1.0 - mp.r / 2.0 - 1j * math.pi / (2.0 * mp.epsilon))


def diagonal_snh_ratio(u, c, mp: ModelParams,
                       cfg: TruncationConfig = DEFAULT_TRUNC) -> complex:
    """-snh(u_d + 2K eps c/pi)/snh(u_d - 2K eps c/pi) with u_d = 2K eps u/pi,
    the closed diagonal ratio in the hyperbolic Jacobi parametrization."""
    em = modulus_from_nome(mp.p, cfg)
    scale = 2.0 * em.K * mp.epsilon / math.pi
    ud = scale * complex(u)
    a = scale * complex(c)
    num = elliptic_fns(ud + a, em, cfg).snh
    den = elliptic_fns(ud - a, em, cfg).snh
    return -num / den


def diagonal_specialization(u, c, mp: ModelParams,
                            cfg: TruncationConfig = DEFAULT_TRUNC) -> VertexK:
    """Vertex reflection matrix at the diagonal point (analytic continuation
    in the boundary height through the explicit form)."""
    return VertexK(matrix=vertex_k_explicit(u, diagonal_boundary_params(c, mp), mp, cfg))


# ---------------------------------------------------------------------------
# Correspondence with the general elliptic reflection matrix

@dataclass(frozen=True)
class IKParams:
    """Parameters of the general elliptic reflection matrix matched to the
    face-vertex construction, with the proportionality residual achieved by
    the selected branch."""

    xi_g: complex
    lambda_g: complex
    mu_g: complex
    tau0: complex
    xi_prime: complex
    a_prime: complex
    mu_prime: complex
    R1: complex
    R2: complex
    c_coeffs: tuple
    residual: float


def _theta_m2tau0(i, w, mp: ModelParams, cfg):
    """theta_i(w/(r tau0); -2/tau0) in the modular-transformed frame: the
    series at nome x^{2r} carries its Jacobi-transformation Gaussian."""
    arg = -1j * mp.epsilon * w / math.pi
    tau = 2j * mp.epsilon * mp.r / math.pi
    return cmath.exp(-mp.epsilon * w * w / (2.0 * mp.r)) * theta(i, arg, tau, cfg)


def _theta_m1tau0(i, w, mp: ModelParams, cfg):
    """theta_i(w/(r tau0); -1/tau0): nome x^r frame with its Gaussian."""
    arg = -1j * mp.epsilon * w / math.pi
    tau = 1j * mp.epsilon * mp.r / math.pi
    return cmath.exp(-mp.epsilon * w * w / mp.r) * theta(i, arg, tau, cfg)


def _kbar_g_entries(u, xi_p, a_p, mp: ModelParams, cfg) -> np.ndarray:
    """Theta-factorized general reflection matrix (bare products; coupling
    coefficients are applied by the caller)."""

    def t0(w):
        return _theta_m2tau0(0, w, mp, cfg)

    def t1(w):
        return _theta_m2tau0(1, w, mp, cfg)

    kpp = t0(u - xi_p) * t1(u + xi_p) * t0(2 * u)
    kmm = t0(u + xi_p) * t1(u - xi_p) * t0(2 * u)
    kpm = t1(2 * u) * t1(u - a_p) * t1(u + a_p)
    kmp = t1(2 * u) * t0(u - a_p) * t0(u + a_p)
    return np.array([[kpp, kpm], [kmp, kmm]], dtype=complex)


def _c_coeff_pp(xi_p, c, l, dl, mp: ModelParams, cfg) -> complex:
    e, r = mp.epsilon, mp.r
    tau0 = 1j * math.pi / (e * r)
    pref = ((2.0 / tau0)
            * mp.xpow((3 * xi_p ** 2 + dl ** 2 + 2 * l ** 2 + 2 * c ** 2 + 2 * l * c) / r)
            / (_theta_m2tau0(0, 0.0, mp, cfg) * _theta_m2tau0(1, 2 * xi_p, mp, cfg)
               * _theta_m2tau0(0, 2 * xi_p, mp, cfg)))
    big = (-_theta_m2tau0(2, xi_p + dl + l, mp, cfg) * _theta_m2tau0(3, xi_p - dl + l, mp, cfg)
           * _theta_m1tau0(1, xi_p + c, mp, cfg) * _theta_m1tau0(1, l + c - xi_p, mp, cfg)
           + _theta_m2tau0(2, xi_p + dl - l, mp, cfg) * _theta_m2tau0(3, xi_p - dl - l, mp, cfg)
           * _theta_m1tau0(1, c - xi_p, mp, cfg) * _theta_m1tau0(1, l + c + xi_p, mp, cfg))
    return pref * big


def _c_coeff_pm(a_p, c, l, dl, mp: ModelParams, cfg) -> complex:
    e, r = mp.epsilon, mp.r
    tau0 = 1j * math.pi / (e * r)
    # the argument -1/tau0 of the first factor is the w = -r member of the
    # transformed family
    pref = ((2.0 / tau0) * _sign_pow(l)
            * mp.xpow((0.75 * r ** 2 + dl ** 2 + 2 * l ** 2 + 2 * c ** 2 + 2 * l * c) / r)
            / (_theta_m2tau0(1, -r, mp, cfg) * _theta_m2tau0(1, -r / 2.0 - a_p, mp, cfg)
               * _theta_m2tau0(1, -r / 2.0 + a_p, mp, cfg)))
    big = (-_theta_m2tau0(2, -r / 2.0 + dl + l, mp, cfg) * _theta_m2tau0(2, -r / 2.0 - dl + l, mp, cfg)
           * _theta_m1tau0(1, -r / 2.0 + c, mp, cfg) * _theta_m1tau0(1, l + c + r / 2.0, mp, cfg)
           + _theta_m2tau0(2, -r / 2.0 + dl - l, mp, cfg) * _theta_m2tau0(2, -r / 2.0 - dl - l, mp, cfg)
           * _theta_m1tau0(1, c + r / 2.0, mp, cfg) * _theta_m1tau0(1, l + c - r / 2.0, mp, cfg))
    return pref * big


def _cg_coeff_plus(xi_p, mp: ModelParams, cfg) -> complex:
    em = modulus_from_nome(mp.p, cfg)
    prod4 = 1.0 + 0.0j
    for i in (1, 2, 3, 4):
        prod4 *= _theta_m2tau0(i, xi_p, mp, cfg)
    return (2.0 * em.k_prime / em.k * prod4
            / (_theta_m2tau0(0, 0.0, mp, cfg) * _theta_m2tau0(1, 2.0 * xi_p, mp, cfg)))


def _cg_coeff_minus(xi_p, a_p, mp: ModelParams, cfg) -> complex:
    em = modulus_from_nome(mp.p, cfg)
    t0a = _theta_m2tau0(0, a_p, mp, cfg)
    t1a = _theta_m2tau0(1, a_p, mp, cfg)
    return (-2.0 / math.sqrt(em.k)
            * _theta_m2tau0(0, xi_p, mp, cfg) ** 2 * _theta_m2tau0(0, 0.0, mp, cfg) ** 2
            / (t0a ** 2 - t1a ** 2))


def _lambda_from_a(a_p, mp: ModelParams, cfg) -> complex:
    t0a = _theta_m2tau0(0, a_p, mp, cfg)
    t1a = _theta_m2tau0(1, a_p, mp, cfg)
    return (t0a ** 2 + t1a ** 2) / (t0a ** 2 - t1a ** 2)


def ik_radical_candidates(bp: BoundaryParams, mp: ModelParams):
    """Candidate (xi', a') values from the closed radicals of the parameter
    map; retained as Newton seeds (see ik_correspondence)."""
    e = mp.epsilon
    c, l, dl = complex(bp.c), complex(bp.l), complex(bp.delta)
    C = mp.xpow(-c)
    L = mp.xpow(-l)
    D = mp.xpow(-dl)
    num = C**4 * L**4 - C**4 * L**2 + C**2 * D**2 * L**4 - C**2 * D**2 + L**2 - 1.0
    den = C**4 * D**2 * L**4 - C**4 * D**2 * L**2 + C**2 * L**4 - C**2 + D**2 * L**2 - D**2
    r1 = cmath.sqrt(num / den)
    xi_cands = [(-cmath.log(s * r1) / (2.0 * e), s * r1) for s in (1.0, -1.0)]
    s_sum = C**2 + C**-2 + D**2 + D**-2 + C**2 * L**2 + C**-2 * L**-2
    inner = (-4.0 * C**4 * D**4 * L**4
             + (-C**4 * D**2 * L**4 - C**4 * D**2 * L**2 - C**2 * D**4 * L**2
                - C**2 * L**2 - D**2 * L**2 - D**2) ** 2)
    a_cands = []
    for si in (1.0, -1.0):
        r2 = cmath.sqrt((s_sum - C**-2 * D**-2 * L**-2 * si * cmath.sqrt(inner)) / 2.0)
        for s in (1.0, -1.0):
            a_cands.append((cmath.log(s * r2) / e, s * r2))
    return xi_cands, a_cands


def _newton_zero(f, z0, max_steps: int = 60):
    z = complex(z0)
    for _ in range(max_steps):
        if abs(z.real) > 1e3 or abs(z.imag) > 1e3:
            return None
        try:
            h = 1e-7
            fp = (f(z + h) - f(z - h)) / (2.0 * h)
            if fp == 0:
                return None
            dz = f(z) / fp
        except (OverflowError, ZeroDivisionError):
            return None
        z -= dz
        if abs(dz) < 1e-13:
            return z
    return None


def _near_lattice(z, spacings) -> bool:
    for (sr, si) in spacings:
        zz = complex(z)
        m = round(zz.real / sr) if sr else 0
        n = round(zz.imag / si) if si else 0
        if abs(zz.real - m * sr) < 1e-6 and abs(zz.imag - n * si) < 1e-6:
            return True
    return False


def ik_parameters_solved(bp: BoundaryParams, mp: ModelParams,
                         cfg: TruncationConfig = DEFAULT_TRUNC):
    """Solve (xi', a') of the theta-factorized form from the zero structure
    of the explicit reflection matrix entries."""
    e, r = mp.epsilon, mp.r
    fpp = lambda u: kbar_entries(u, bp, mp, cfg)[0, 0]
    fpm = lambda u: kbar_entries(u, bp, mp, cfg)[0, 1]
    xi_seeds, a_seeds = ik_radical_candidates(bp, mp)
    seeds = [w for w, _ in xi_seeds] + [w for w, _ in a_seeds]
    grid = [complex(sr * r, si * math.pi / e)
            for sr in (-0.45, -0.3, -0.15, 0.1, 0.2, 0.35, 0.48, 0.65, 0.8)
            for si in (0.0, 0.5, -0.5, 0.25)]

    def collect(f, bad_spacings, seed_extra):
        zs = []
        for z0 in seed_extra + grid:
            z = _newton_zero(f, z0)
            if z is None:
                continue
            try:
                if abs(f(z)) > 1e-9:
                    continue
            except OverflowError:
                continue
            pr = math.pi / e
            zr = complex((z.real + r) % (2.0 * r) - r, (z.imag + pr / 2) % pr - pr / 2)
            if _near_lattice(zr, bad_spacings):
                continue
            if not any(abs(zr - w) < 1e-8 for w in zs):
                zs.append(zr)
        return zs

    # exclude the theta0(2u) family u in r(Z+1/2) + i pi/(2 eps) Z and the
    # theta1(2u) family u in r Z + i pi/(2 eps) Z
    pp_zeros = [z for z in collect(fpp, [], [ -w for w, _ in xi_seeds ])
                if not _near_lattice(z - r / 2.0, [(r, math.pi / (2 * e))])]
    pm_zeros = [z for z in collect(fpm, [(r, math.pi / (2 * e))], [w for w, _ in a_seeds])]
    xi_cands = []
    for z in pp_zeros:
        for cand in (-z, z - r, z + r):
            if not any(abs(cand - w) < 1e-8 for w in xi_cands):
                xi_cands.append(cand)
    a_cands = []
    for z in pm_zeros:
        for cand in (z, -z):
            if not any(abs(cand - w) < 1e-8 for w in a_cands):
                a_cands.append(cand)
    return xi_cands, a_cands


def ik_correspondence(u, bp: BoundaryParams, mp: ModelParams,
                      cfg: TruncationConfig = DEFAULT_TRUNC,
                      u_samples=None, tol: float = 1e-8) -> IKParams:
    """Match the explicit vertex reflection matrix to the general elliptic
    solution of the boundary Yang-Baxter equation.

    The parameters (xi', a') are located from the zero structure of the
    matrix entries (the closed radical map serves as Newton seeds; its
    printed form does not reproduce the matrix), every sign/lattice branch is
    tried, and the elementwise proportionality is verified at u and at the
    additional spectral samples.  Raises BranchResolutionError when no branch
    reproduces the matrix within tol.
    """
    u = complex(u)
    if u_samples is None:
        u_samples = [u, 0.031, 0.077, 0.123, 0.185, 0.240]
    c, l, dl = complex(bp.c), complex(bp.l), complex(bp.delta)
    xi_cands, a_cands = ik_parameters_solved(bp, mp, cfg)
    if not xi_cands or not a_cands:
        raise BranchResolutionError("no candidate parameters found from the zero structure")

    kbars = [kbar_entries(us, bp, mp, cfg) for us in u_samples]
    # anchor the two coupling constants at the sample farthest from any zero
    bares = {}
    best = None
    for xi_p in xi_cands:
        for a_p in a_cands:
            key = (xi_p, a_p)
            if key not in bares:
                bares[key] = [_kbar_g_entries(complex(us), xi_p, a_p, mp, cfg)
                              for us in u_samples]
            bg = bares[key]
            i0 = max(range(len(u_samples)),
                     key=lambda i: float(np.abs(bg[i]).min()))
            if float(np.abs(bg[i0]).min()) < 1e-12:
                continue
            cpp = kbars[i0][0, 0] / bg[i0][0, 0]
            cpm = kbars[i0][0, 1] / bg[i0][0, 1]
            coeff = np.array([[cpp, cpm], [-cpm, -cpp]])
            worst = 0.0
            for kb, kgb in zip(kbars, bg):
                model = coeff * kgb
                scale = max(np.abs(kb).max(), np.abs(model).max())
                worst = max(worst, float(np.abs(kb - model).max() / scale))
            if best is None or worst < best[0]:
                best = (worst, xi_p, a_p, cpp, cpm)

    if best is None:
        raise BranchResolutionError("factorized form degenerate at every branch")
    worst, xi_p, a_p, cpp, cpm = best
    cgp = _cg_coeff_plus(xi_p, mp, cfg)
    cgm = _cg_coeff_minus(xi_p, a_p, mp, cfg)
    mu_p = (cpm * cgp) / (cpp * cgm)
    if worst > tol:
        raise BranchResolutionError(
            f"no branch reproduces the reflection matrix: best residual {worst:.3e} "
            f"(xi'={xi_p:.6g}, a'={a_p:.6g})")
    em = modulus_from_nome(mp.p, cfg)
    tau0 = 1j * math.pi / (mp.epsilon * mp.r)
    xi_g = 2.0 * em.K * (-1j) * mp.epsilon * xi_p / math.pi
    return IKParams(
        xi_g=xi_g,
        lambda_g=_lambda_from_a(a_p, mp, cfg),
        mu_g=mu_p,
        tau0=tau0,
        xi_prime=xi_p,
        a_prime=a_p,
        mu_prime=mu_p,
        R1=mp.xpow(2.0 * xi_p),
        R2=mp.xpow(-a_p),
        c_coeffs=(cpp, cpm, -cpp, -cpm),
        residual=worst,
    )
