"""Unrestricted solid-on-solid face weights, the diagonal boundary reflection
weight with its exact normalization, and residual evaluators for the six
face-side relations (star-triangle, unitarity, crossing, reflection equation,
boundary unitarity, boundary crossing).

Heights are unrestricted integers; adjacent heights must differ by one, and
every non-admissible configuration has weight zero.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass
from enum import Enum

from .elliptic import (
    DEFAULT_TRUNC,
    ModelParams,
    TruncationConfig,
    bracket,
    qpoch,
)
from .vertex import SpectralPoint, r_normalization

__all__ = [
    "heights_clear_of_lattice",
    "FaceConfig",
    "SosBoundaryParams",
    "DiagonalK",
    "Region",
    "GroundSector",
    "w_face",
    "star_triangle_residual",
    "face_unitarity_residual",
    "face_crossing_residual",
    "k_diagonal",
    "k_diagonal_entry",
    "reflection_residual",
    "boundary_unitarity_residual",
    "boundary_crossing_residual",
    "ground_state_sector",
    "sample_star_triangle_heights",
]


@dataclass(frozen=True)
class FaceConfig:
    """Heights around a face (NW, NE, SW, SE) and the spectral parameter."""

    a: int
    b: int
    c: int
    d: int
    u: complex

    def admissible(self) -> bool:
        return (abs(self.a - self.b) == 1 and abs(self.a - self.c) == 1
                and abs(self.b - self.d) == 1 and abs(self.c - self.d) == 1)


class Region(Enum):
    A = "A"
    B = "B"


class GroundSector(Enum):
    DIAGONAL = "H(k,k)"
    LOWERED = "H(k-1,k)"


@dataclass(frozen=True)
class SosBoundaryParams:
    """Diagonal boundary data: strength b in (-1,1), region A or B, wall height k.

    Region B has c = b real; region A realizes x^{2c} = -x^{2b} through
    c = b + i pi/(2 epsilon).
    """

    b: float
    region: Region
    k: int

    def __post_init__(self):
        if not (-1.0 < self.b < 1.0):
            raise ValueError(f"b must lie in (-1,1), got {self.b}")

    def c(self, mp: ModelParams) -> complex:
        if self.region is Region.B:
            return complex(self.b)
        return self.b + 1j * math.pi / (2.0 * mp.epsilon)


@dataclass(frozen=True)
class DiagonalK:
    """Normalized diagonal reflection weights K(k+1,k,k|u) and K(k-1,k,k|u)."""

    plus: complex
    minus: complex
    sign_branch: str  # "gt" for b > 0, "lt" for b < 0


def _u(val) -> complex:
    return complex(val.u) if isinstance(val, SpectralPoint) else complex(val)


def w_face(cfg: FaceConfig, mp: ModelParams, trunc: TruncationConfig = DEFAULT_TRUNC) -> complex:
    """Face weight W(a b / c d | u); zero for non-admissible heights."""
    if not cfg.admissible():
        return 0.0 + 0.0j
    a, b, c, d = cfg.a, cfg.b, cfg.c, cfg.d
    u = _u(cfg.u)
    _, r0, _ = r_normalization(u, mp, trunc)
    if b == c:
        if d == a:
            # bounce off the diagonal: [1][a±u] / ([a][1-u]) with ± = b - a
            s = b - a
            return r0 * (bracket(1.0, mp, trunc) * bracket(a + s * u, mp, trunc)
                         / (bracket(a, mp, trunc) * bracket(1.0 - u, mp, trunc)))
        return r0  # straight-through face (a, a±1 / a±1, a±2)
    # b != c forces d == a; the SW corner and the overall sign are fixed by
    # the face-vertex correspondence with the sign-flipped vertex weights
    return -r0 * (bracket(c, mp, trunc) * bracket(u, mp, trunc)
                  / (bracket(a, mp, trunc) * bracket(1.0 - u, mp, trunc)))


def _wf(a, b, c, d, u, mp, trunc) -> complex:
    return w_face(FaceConfig(a, b, c, d, u), mp, trunc)



def _wrel(p, q, r, s, u, mp, trunc) -> complex:
    """Weight in the relation slot order: W(p q / r s | u) is the face with
    NW=p, NE=r, SW=q, SE=s (relations list the left column first)."""
    return w_face(FaceConfig(p, r, q, s, u), mp, trunc)

def _adj(*heights):
    """Integers adjacent to every height in the argument list."""
    sets = [{h - 1, h + 1} for h in heights]
    out = sets[0]
    for s in sets[1:]:
        out = out & s
    return sorted(out)


def star_triangle_residual(heights, u, v, mp: ModelParams,
                           trunc: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Residual of the star-triangle relation for external heights
    (a, b, c, d, e, f); the internal height is summed over."""
    a, b, c, d, e, f = heights
    u, v = _u(u), _u(v)
    lhs = sum(_wrel(f, g, a, b, u - v, mp, trunc) * _wrel(g, d, b, c, u, mp, trunc)
              * _wrel(f, e, g, d, v, mp, trunc) for g in _adj(f, b, d))
    rhs = sum(_wrel(a, g, b, c, v, mp, trunc) * _wrel(f, e, a, g, u, mp, trunc)
              * _wrel(e, d, g, c, u - v, mp, trunc) for g in _adj(a, c, e))
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale


def heights_clear_of_lattice(heights, mp: ModelParams, pad: int = 1) -> bool:
    """True when no height (nor its pad-neighborhood) sits on the r*Z lattice,
    where brackets of heights vanish and weights are singular."""
    for h in heights:
        for d in range(-pad, pad + 1):
            m = round((h + d) / mp.r)
            if abs((h + d) - m * mp.r) < 1e-3 and m != 0 or (h + d) == 0:
                return False
    return True


def sample_star_triangle_heights(rng, mp: ModelParams, base: int = 5):
    """Random admissible external hexagon (a..f) around the given base height,
    kept away from bracket zeros of the unrestricted height lattice."""
    while True:
        a = base + int(rng.integers(-1, 2))
        b = a + int(rng.choice([-1, 1]))
        c = b + int(rng.choice([-1, 1]))
        d = c + int(rng.choice([-1, 1]))
        e = d + int(rng.choice([-1, 1]))
        f = e + int(rng.choice([-1, 1]))
        if abs(f - a) != 1:
            continue
        if not (_adj(f, b, d) or _adj(a, c, e)):
            continue
        if heights_clear_of_lattice((a, b, c, d, e, f), mp):
            return (a, b, c, d, e, f)


def face_unitarity_residual(d, a, b, c, u, mp: ModelParams,
                            trunc: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Residual of sum_g W(d g / a b | u) W(d c / g b | -u) = delta_{ac}.

    Vacuously zero when the external heights are not admissible."""
    if not (abs(d - a) == 1 and abs(a - b) == 1 and abs(d - c) == 1 and abs(c - b) == 1):
        return 0.0
    u = _u(u)
    acc = sum(_wrel(d, g, a, b, u, mp, trunc) * _wrel(d, c, g, b, -u, mp, trunc)
              for g in _adj(d, b))
    return abs(acc - (1.0 if a == c else 0.0))


def face_crossing_residual(d, c, a, b, u, mp: ModelParams,
                           trunc: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Residual of the crossing relation
    W(d c / a b | u) = -sgn(c-d) sgn(b-a) ([c]/[d]) W(a d / b c | 1-u).

    The step-sign factors carry the sign gauge of the flipped-weight
    convention; in the all-positive gauge the factor collapses to [a]/[b]."""
    u = _u(u)
    sign = -float(np.sign(c - d) * np.sign(b - a)) if abs(c - d) == 1 and abs(b - a) == 1 else 1.0
    lhs = _wrel(d, c, a, b, u, mp, trunc)
    rhs = sign * (bracket(c, mp, trunc) / bracket(d, mp, trunc)) \
        * _wrel(a, d, b, c, 1.0 - u, mp, trunc)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


# ---------------------------------------------------------------------------
# Diagonal boundary weight

def _f_factor(z, mp: ModelParams, trunc: TruncationConfig):
    x = mp.x
    bases = [x ** 8, mp.p]
    return (qpoch(mp.p * z, bases, trunc) * qpoch(x ** 8 * z, bases, trunc)
            / (qpoch(x ** 6 * z, bases, trunc) * qpoch(x ** (2 + 2 * mp.r) * z, bases, trunc)))


def _p_gt(z, c, k, mp: ModelParams, trunc: TruncationConfig):
    x = mp.x
    bases = [x ** 4, mp.p]

    def brace(a):
        return qpoch(mp.xpow(a) * z, bases, trunc)

    return (brace(2 * (1 + c)) * brace(2 * (mp.r - c - k + 1))
            / (brace(2 * (mp.r - c)) * brace(2 * (c + k))))


def _p_lt(z, c, k, mp: ModelParams, trunc: TruncationConfig):
    x = mp.x
    bases = [x ** 4, mp.p]

    def brace(a):
        return qpoch(mp.xpow(a) * z, bases, trunc)

    return (brace(2 * (1 - c)) * brace(2 * (c + k + 1))
            / (brace(2 * (mp.r + c)) * brace(2 * (mp.r - c - k))))


def _h_norm(u, c, k, mp: ModelParams, trunc: TruncationConfig, branch: str) -> complex:
    u = complex(u)
    zeta = mp.xpow(2.0 * u)
    x2 = mp.x ** 2
    if branch == "gt":
        expo = (mp.r - 1.0 - 2.0 * k) / (2.0 * mp.r)
        pfun = _p_gt
    else:
        expo = (2.0 * k - 1.0 - mp.r) / (2.0 * mp.r)
        pfun = _p_lt
    head = mp.xpow(2.0 * u * expo)
    return head * (_f_factor(zeta ** 2, mp, trunc) * pfun(zeta, c, k, mp, trunc)
                   * pfun(x2 / zeta, c, k, mp, trunc)) \
        / (_f_factor(zeta ** -2, mp, trunc) * pfun(1.0 / zeta, c, k, mp, trunc)
           * pfun(x2 * zeta, c, k, mp, trunc))


def _ratio(c, k, u, mp: ModelParams, trunc: TruncationConfig) -> complex:
    """[c+u][k+c-u] / ([c-u][k+c+u])."""
    return (bracket(c + u, mp, trunc) * bracket(k + c - u, mp, trunc)
            / (bracket(c - u, mp, trunc) * bracket(k + c + u, mp, trunc)))


def k_diagonal_entry(kp: int, c, k: int, u, mp: ModelParams, branch: str,
                     trunc: TruncationConfig = DEFAULT_TRUNC) -> complex:
    """Normalized diagonal reflection weight K(kp, k, k | u), kp = k±1.

    branch "gt" is the b > 0 normalization, "lt" the b < 0 one; both keep the
    leading boundary transfer-matrix eigenvalue at one.
    """
    if kp not in (k + 1, k - 1):
        raise ValueError("boundary weight requires kp = k±1")
    u = _u(u)
    h = _h_norm(u, c, k, mp, trunc, branch)
    if branch == "gt":
        return h if kp == k + 1 else h / _ratio(c, k, u, mp, trunc)
    return h * _ratio(c, k, u, mp, trunc) if kp == k + 1 else h


def k_diagonal(sbp: SosBoundaryParams, u, mp: ModelParams,
               trunc: TruncationConfig = DEFAULT_TRUNC) -> DiagonalK:
    """Normalized diagonal reflection pair at the wall height sbp.k.

    Spectral parameters outside 0 < u < |b| are evaluated anyway; the
    normalization is only meaningful inside that window.
    """
    u = _u(u)
    branch = "gt" if sbp.b > 0 else "lt"
    c = sbp.c(mp)
    return DiagonalK(
        plus=k_diagonal_entry(sbp.k + 1, c, sbp.k, u, mp, branch, trunc),
        minus=k_diagonal_entry(sbp.k - 1, c, sbp.k, u, mp, branch, trunc),
        sign_branch=branch,
    )


def _k_weight(f: int, g: int, a: int, u, c, mp, branch, trunc) -> complex:
    """Reflection weight K(f g a | u): vanishes unless g == a and f = a±1."""
    if g != a or abs(f - a) != 1:
        return 0.0 + 0.0j
    return k_diagonal_entry(f, c, a, u, mp, branch, trunc)


def reflection_residual(k: int, u, v, sbp: SosBoundaryParams, mp: ModelParams,
                        trunc: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Worst relative residual of the reflection equation with the wall at
    height k, maximized over the admissible external height assignments."""
    u, v = _u(u), _u(v)
    c = sbp.c(mp)
    branch = "gt" if sbp.b > 0 else "lt"
    a = e = k
    worst = 0.0
    for b in (k - 1, k + 1):
        for d in (k - 1, k + 1):
            for cc in set(_adj(b)) & set(_adj(d)):
                lhs = 0.0 + 0.0j
                rhs = 0.0 + 0.0j
                for f in _adj(a):
                    g = a
                    lhs += (_wrel(cc, f, b, a, u - v, mp, trunc)
                            * _wrel(cc, d, f, g, u + v, mp, trunc)
                            * _k_weight(f, g, a, u, c, mp, branch, trunc)
                            * _k_weight(d, e, g, v, c, mp, branch, trunc))
                    rhs += (_wrel(cc, d, f, e, u - v, mp, trunc)
                            * _wrel(cc, f, b, g, u + v, mp, trunc)
                            * _k_weight(f, e, g, u, c, mp, branch, trunc)
                            * _k_weight(b, g, a, v, c, mp, branch, trunc))
                scale = max(abs(lhs), abs(rhs), 1e-300)
                worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def boundary_unitarity_residual(k: int, u, sbp: SosBoundaryParams, mp: ModelParams,
                                trunc: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Residual of K(k', k, k | u) K(k', k, k | -u) = 1 over k' = k±1."""
    u = _u(u)
    c = sbp.c(mp)
    branch = "gt" if sbp.b > 0 else "lt"
    worst = 0.0
    for kp in (k - 1, k + 1):
        prod = (k_diagonal_entry(kp, c, k, u, mp, branch, trunc)
                * k_diagonal_entry(kp, c, k, -u, mp, branch, trunc))
        worst = max(worst, abs(prod - 1.0))
    return worst


def boundary_crossing_residual(k: int, u, sbp: SosBoundaryParams, mp: ModelParams,
                               trunc: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Residual of the boundary crossing relation
    K(k',1-u) = sum_{k''} ([k'']/[k]) W(k' k / k k'' | 2-2u) K(k'', u)."""
    u = _u(u)
    c = sbp.c(mp)
    branch = "gt" if sbp.b > 0 else "lt"
    worst = 0.0
    for kp in (k - 1, k + 1):
        lhs = k_diagonal_entry(kp, c, k, 1.0 - u, mp, branch, trunc)
        rhs = 0.0 + 0.0j
        for kpp in (k - 1, k + 1):
            rhs += (bracket(kpp, mp, trunc) / bracket(k, mp, trunc)
                    * _wrel(kp, k, k, kpp, -2.0 * u + 2.0, mp, trunc)
                    * k_diagonal_entry(kpp, c, k, u, mp, branch, trunc))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return worst


def ground_state_sector(sbp: SosBoundaryParams, mp: ModelParams,
                        u_sample: float = None) -> GroundSector:
    """Ground-state sector of the boundary transfer matrix: H(k,k) for b > 0,
    H(k-1,k) for b < 0, confirmed by the weight ratio at a sample u."""
    if sbp.b == 0.0:
        raise ValueError("b = 0 leaves the ground-state sector ambiguous")
    if abs(sbp.b) < 1e-8:
        import warnings

        warnings.warn(f"b = {sbp.b:.2e} is nearly degenerate; sector barely resolved")
    if u_sample is None:
        u_sample = 0.45 * abs(sbp.b)
    ratio = _ratio(sbp.c(mp), sbp.k, u_sample, mp, DEFAULT_TRUNC)
    expected = sbp.b > 0
    if abs(ratio.imag) < 1e-8 * abs(ratio) and (ratio.real > 1.0) != expected:
        raise RuntimeError(f"weight ratio {ratio} contradicts the sign rule for b={sbp.b}")
    return GroundSector.DIAGONAL if sbp.b > 0 else GroundSector.LOWERED
