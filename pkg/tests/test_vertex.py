import itertools
import math

import numpy as np
import pytest

from bxyz.elliptic import ModelParams
from bxyz.vertex import (
    crossing_residual,
    r_matrix,
    r_normalization,
    rho,
    spectral,
    unitarity_residual,
    ybe_residual,
)

MP = ModelParams(1.0, 2.0)


def brute_qpoch(z, bases, box=40):
    acc = 1.0
    for tup in itertools.product(range(box), repeat=len(bases)):
        m = 1.0
        for b, n in zip(bases, tup):
            m *= b ** n
        if m > 1e-30:
            acc *= 1.0 - z * m
    return acc


class TestNormalization:
    def test_r0_at_zero(self):
        _, r0, _ = r_normalization(0.0, MP)
        assert abs(r0 - 1.0) < 1e-14

    def test_kappa_r0_brute_force(self):
        u = 0.3
        x, r, p = MP.x, MP.r, MP.p
        zeta = x ** (2 * u)
        bases = [x ** 4, p]

        def bf_rho(z):
            return (brute_qpoch(x ** 4 * z, bases) * brute_qpoch(p * z, bases)
                    / (brute_qpoch(x ** 2 * z, bases) * brute_qpoch(x ** (2 * r + 2) * z, bases)))

        r0_bf = zeta ** ((r - 1) / (2 * r)) * bf_rho(zeta) / bf_rho(1 / zeta)
        kap_bf = (zeta ** (-(r - 1) / (2 * r)) * x ** (1 - r / 2)
                  / (brute_qpoch(p, [p], 60) ** 2 * brute_qpoch(x ** (4 * r), [x ** (4 * r)], 60)
                     * brute_qpoch(x ** 2 / zeta, [p], 60)
                     * brute_qpoch(x ** (2 * r - 2) * zeta, [p], 60)))
        kap, r0, _ = r_normalization(u, MP)
        assert abs(kap * r0 - kap_bf * r0_bf) / abs(kap_bf * r0_bf) < 1e-12

    def test_rho_ratio_consistency_with_unitarity(self):
        assert unitarity_residual(0.37, MP) < 1e-11


class TestRMatrix:
    def test_initial_condition(self):
        m = r_matrix(0.0, MP).entries
        assert np.abs(m @ m - np.eye(4)).max() < 1e-11

    def test_d_vanishes_at_zero(self):
        assert abs(r_matrix(0.0, MP).entries[0, 3]) < 1e-14

    def test_entries_against_product_form_thetas(self):
        # independent re-evaluation of the weights through triple products
        from tests.test_elliptic import triple_product_theta

        u = 0.35
        mp = MP
        tau = 2j * mp.epsilon * mp.r / math.pi
        q = math.exp(-2 * mp.epsilon * mp.r)
        w0 = 1j * mp.epsilon / math.pi
        kap, r0, _ = r_normalization(u, mp)
        pref = -1j * kap * r0
        a_ref = pref * (triple_product_theta(4, w0, q) * triple_product_theta(4, w0 * u, q)
                        * triple_product_theta(1, w0 * (1 - u), q))
        m = r_matrix(u, mp)
        assert abs(m.entries[0, 0] - a_ref) / abs(a_ref) < 1e-11

    def test_spin_flip_symmetry(self):
        m = r_matrix(0.21, MP)
        for e1, e2, f1, f2 in itertools.product((1, -1), repeat=4):
            assert abs(m.entry(e1, e2, f1, f2) - m.entry(-e1, -e2, -f1, -f2)) < 1e-14

    def test_negate_d_flag(self):
        a = r_matrix(0.3, MP).entries
        b = r_matrix(0.3, MP, negate_d=True).entries
        assert abs(a[0, 3] + b[0, 3]) < 1e-15
        assert abs(a[0, 0] - b[0, 0]) < 1e-15

    def test_derivative_stencil_consistency(self):
        # 2-point small-step derivative against a wider 4th-order stencil
        u0 = 0.3

        def entry(u):
            return r_matrix(u, MP).entries[1, 2]

        h = 1e-4
        d2 = (entry(u0 + h) - entry(u0 - h)) / (2 * h)
        H = 1e-3
        d4 = (entry(u0 - 2 * H) - 8 * entry(u0 - H) + 8 * entry(u0 + H)
              - entry(u0 + 2 * H)) / (12 * H)
        assert abs(d2 - d4) / abs(d4) < 1e-6


class TestRelations:
    def test_ybe_random(self):
        assert ybe_residual(0.31, 0.12, -0.27, MP) <= 1e-10

    def test_ybe_degenerate(self):
        assert ybe_residual(0.25, 0.25, -0.1, MP) <= 1e-10

    def test_ybe_complex_window(self):
        mp = ModelParams(0.5, 4.0)
        assert ybe_residual(0.31 + 0.1j, 0.12, -0.27 - 0.05j, mp) <= 1e-9

    def test_unitarity(self):
        assert unitarity_residual(0.41, MP) <= 1e-11

    def test_crossing_self_dual(self):
        assert crossing_residual(0.5, MP) <= 1e-11

    def test_crossing_generic(self):
        assert crossing_residual(0.2, ModelParams(0.7, 3.0)) <= 1e-10

    def test_window_sweep(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(25):
            mp = ModelParams(float(rng.uniform(0.5, 1.5)), float(rng.uniform(1.5, 4.0)))
            u1, u2, u3 = rng.uniform(-0.8, 0.8, 3)
            worst = max(worst, ybe_residual(u1, u2, u3, mp),
                        unitarity_residual(u1, mp), crossing_residual(abs(u2), mp))
        assert worst <= 1e-9


def test_spectral_point():
    sp = spectral(0.3, MP)
    assert abs(sp.zeta - MP.xpow(0.6)) == 0
