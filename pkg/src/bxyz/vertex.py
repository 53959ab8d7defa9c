"""Eight-vertex bulk weights: the R-matrix with unit partition-function-per-site
normalization, and residual evaluators for the Yang-Baxter, unitarity and
crossing relations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import (
    DEFAULT_TRUNC,
    ModelParams,
    TruncationConfig,
    qpoch,
    theta,
)

__all__ = [
    "SpectralPoint",
    "RMatrix",
    "spectral",
    "r_normalization",
    "r_matrix",
    "ybe_residual",
    "unitarity_residual",
    "crossing_residual",
]

_IDX = {(1, 1): 0, (1, -1): 1, (-1, 1): 2, (-1, -1): 3}


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter u with its multiplicative form zeta = x^{2u}."""

    u: complex
    zeta: complex


def spectral(u, mp: ModelParams) -> SpectralPoint:
    return SpectralPoint(u=complex(u), zeta=mp.xpow(2.0 * complex(u)))


@dataclass(frozen=True)
class RMatrix:
    """4x4 vertex weights indexed by spin pairs; rows are outgoing indices."""

    entries: np.ndarray

    def entry(self, e1p: int, e2p: int, e1: int, e2: int) -> complex:
        return self.entries[_IDX[(e1p, e2p)], _IDX[(e1, e2)]]


def _as_u(u) -> complex:
    return complex(u.u) if isinstance(u, SpectralPoint) else complex(u)


def rho(z, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC):
    """{x^4 z}{x^{2r} z} / ({x^2 z}{x^{2r+2} z}) with {w} = (w; x^4, x^{2r})."""
    x = mp.x
    bases = [x ** 4, mp.p]
    return (qpoch(x ** 4 * z, bases, cfg) * qpoch(mp.p * z, bases, cfg)
            / (qpoch(x ** 2 * z, bases, cfg) * qpoch(x ** (2 * mp.r + 2) * z, bases, cfg)))


def r_normalization(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC):
    """Normalization scalars (kappa, R0, rho_ratio) at spectral parameter u.

    R0(u) = zeta^{(r-1)/(2r)} rho(zeta)/rho(1/zeta) is the partition-function-
    per-site normalization shared with the face weights.
    """
    u = _as_u(u)
    x, r, p = mp.x, mp.r, mp.p
    zeta = mp.xpow(2.0 * u)
    rho_ratio = rho(zeta, mp, cfg) / rho(1.0 / zeta, mp, cfg)
    r0 = mp.xpow(u * (r - 1.0) / r) * rho_ratio
    kappa = (mp.xpow(-u * (r - 1.0) / r) * x ** (1.0 - r / 2.0)
             / (qpoch(p, [p], cfg) ** 2 * qpoch(x ** (4 * r), [x ** (4 * r)], cfg)
                * qpoch(x ** 2 / zeta, [p], cfg) * qpoch(x ** (2 * r - 2) * zeta, [p], cfg)))
    return kappa, r0, rho_ratio


def r_matrix(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC,
             negate_d: bool = False) -> RMatrix:
    """Eight-vertex R-matrix at spectral parameter u.

    The two all-flip entries carry the opposite sign relative to the
    convention in which all weights are positive in the principal regime;
    negate_d=True restores that reference convention.
    """
    u = _as_u(u)
    e, r = mp.epsilon, mp.r
    tau = 2j * e * r / math.pi
    w0 = 1j * e / math.pi

    def t1(w):
        return theta(1, w, tau, cfg)

    def t4(w):
        return theta(4, w, tau, cfg)

    kappa, r0, _ = r_normalization(u, mp, cfg)
    pref = -1j * kappa * r0
    a = pref * t4(w0) * t4(w0 * u) * t1(w0 * (1.0 - u))
    b = pref * t4(w0) * t1(w0 * u) * t4(w0 * (1.0 - u))
    c = pref * t1(w0) * t4(w0 * u) * t4(w0 * (1.0 - u))
    d = pref * t1(w0) * t1(w0 * u) * t1(w0 * (1.0 - u))
    if negate_d:
        d = -d
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = a
    m[1, 1] = m[2, 2] = b
    m[1, 2] = m[2, 1] = c
    m[0, 3] = m[3, 0] = d
    return RMatrix(entries=m)


def _embed3(m: np.ndarray, slot_a: int, slot_b: int) -> np.ndarray:
    """Lift a two-site operator onto sites (slot_a, slot_b) of a 3-site chain."""
    out = np.zeros((8, 8), dtype=complex)
    for row in range(8):
        ro = [(row >> (2 - k)) & 1 for k in range(3)]
        for col in range(8):
            co = [(col >> (2 - k)) & 1 for k in range(3)]
            ok = all(ro[k] == co[k] for k in range(3) if k not in (slot_a, slot_b))
            if not ok:
                continue
            out[row, col] = m[2 * ro[slot_a] + ro[slot_b], 2 * co[slot_a] + co[slot_b]]
    return out


def ybe_residual(u1, u2, u3, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Relative max-norm residual of the Yang-Baxter equation
    R12(u1-u2) R13(u1-u3) R23(u2-u3) = R23 R13 R12."""
    u1, u2, u3 = _as_u(u1), _as_u(u2), _as_u(u3)
    r12 = _embed3(r_matrix(u1 - u2, mp, cfg).entries, 0, 1)
    r13 = _embed3(r_matrix(u1 - u3, mp, cfg).entries, 0, 2)
    r23 = _embed3(r_matrix(u2 - u3, mp, cfg).entries, 1, 2)
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    scale = max(np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / scale)


_PERM = np.zeros((4, 4))
for _i, (_e1, _e2) in enumerate([(1, 1), (1, -1), (-1, 1), (-1, -1)]):
    _PERM[_IDX[(_e2, _e1)], _i] = 1.0


def unitarity_residual(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Relative residual of R12(u) R21(-u) = id."""
    u = _as_u(u)
    m = r_matrix(u, mp, cfg).entries @ (_PERM @ r_matrix(-u, mp, cfg).entries @ _PERM)
    return float(np.abs(m - np.eye(4)).max() / np.abs(m).max())


def crossing_residual(u, mp: ModelParams, cfg: TruncationConfig = DEFAULT_TRUNC) -> float:
    """Relative residual of R(1-u)^{e1 e2}_{e1' e2'} = R(u)^{e2, -e1'}_{e2', -e1}."""
    u = _as_u(u)
    ra = r_matrix(1.0 - u, mp, cfg)
    rb = r_matrix(u, mp, cfg)
    worst = 0.0
    scale = max(np.abs(ra.entries).max(), np.abs(rb.entries).max())
    for e1 in (1, -1):
        for e2 in (1, -1):
            for f1 in (1, -1):
                for f2 in (1, -1):
                    lhs = ra.entry(e1, e2, f1, f2)
                    rhs = rb.entry(e2, -f1, f2, -e1)
                    worst = max(worst, abs(lhs - rhs))
    return worst / scale
