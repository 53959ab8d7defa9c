import cmath
import math

import numpy as np
import pytest

from bxyz.elliptic import DEFAULT_TRUNC, ModelParams, bracket, elliptic_fns, modulus_from_nome, theta
from bxyz.face_vertex import (
    BoundaryParams,
    _kbar_g_entries,
    _theta_m2tau0,
    boundary_ybe_residual,
    diagonal_boundary_params,
    diagonal_snh_ratio,
    diagonal_specialization,
    fv_rw_residual,
    ik_correspondence,
    intertwiner,
    kbracket_residual,
    vec_relations_residual,
    vertex_k_explicit,
    vertex_k_from_face,
    vertex_k_summed,
)

MP = ModelParams(1.0, 2.3)


class TestIntertwiners:
    def test_height_completeness(self):
        u, n = 0.3, 5
        for np_ in (4, 6):
            for npp in (4, 6):
                acc = sum(intertwiner("t_star", e, n, np_, u, MP)
                          * intertwiner("t", e, npp, n, u, MP) for e in (1, -1))
                assert abs(acc - (1.0 if np_ == npp else 0.0)) < 1e-11

    def test_spin_completeness(self):
        u, n = 0.3, 5
        for ep in (1, -1):
            for e in (1, -1):
                acc = sum(intertwiner("t_star", ep, s, n, u, MP)
                          * intertwiner("t", e, n, s, u, MP) for s in (4, 6))
                assert abs(acc - (1.0 if ep == e else 0.0)) < 1e-11

    def test_all_relations(self):
        assert vec_relations_residual(0.3, 5, MP) <= 1e-10
        assert vec_relations_residual(0.53 + 0.1j, 4, ModelParams(0.8, 2.7)) <= 1e-10

    def test_invalid_step(self):
        with pytest.raises(ValueError):
            intertwiner("t", 1, 3, 5, 0.3, MP)

    def test_dual_pole(self):
        with pytest.raises(ZeroDivisionError):
            intertwiner("t_star", 1, 5, 6, 0.0, MP)


class TestFaceVertexCorrespondence:
    def test_generic(self):
        assert fv_rw_residual(0.4, 0.1, 0.7, 4, MP) <= 1e-10

    def test_equal_arguments(self):
        assert fv_rw_residual(0.4, 0.4, 0.7, 4, MP) <= 1e-11

    def test_complex_frame(self):
        assert fv_rw_residual(0.4, 0.1, 0.5 + 0.3j, 4, MP) <= 1e-9

    def test_kbracket_identity(self):
        assert kbracket_residual(0.37, 4, 6, MP) <= 1e-10
        assert kbracket_residual(0.21 + 0.05j, 3, 3, MP) <= 1e-10
        assert kbracket_residual(0.52, 3, 6, MP) <= 1e-10


class TestVertexK:
    def setup_method(self):
        self.bp = BoundaryParams(c=-0.4 + 1j * math.pi / 2, l=3, u0=0.6)

    def test_two_routes_agree(self):
        K = vertex_k_from_face(0.15, self.bp, MP)
        assert K.route_residual <= 1e-9

    def test_two_routes_real_c(self):
        bp = BoundaryParams(c=-0.45, l=3, u0=0.55)
        K = vertex_k_from_face(0.12, bp, MP)
        assert K.route_residual <= 1e-9

    def test_boundary_ybe(self):
        assert boundary_ybe_residual(0.15, 0.08, self.bp, MP) <= 1e-8

    def test_identity_at_zero(self):
        K = vertex_k_from_face(1e-13, self.bp, MP).matrix
        scale = abs(K[0, 0])
        assert abs(K[0, 1]) <= 1e-9 * scale
        assert abs(K[1, 0]) <= 1e-9 * scale
        assert abs(K[0, 0] - K[1, 1]) <= 1e-9 * scale

    def test_periodicity_in_height(self):
        # doubling the height label by a 2r shift only changes overall sign
        u = 0.11
        a = vertex_k_explicit(u, BoundaryParams(c=-0.45, l=1.3, u0=0.55), MP)
        b = vertex_k_explicit(u, BoundaryParams(c=-0.45, l=1.3 + 2 * MP.r, u0=0.55), MP)
        ratios = b / a
        assert np.abs(ratios - ratios[0, 0]).max() < 1e-8 * np.abs(ratios[0, 0])

    def test_boundary_ybe_sweep(self):
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(6):
            mp = ModelParams(float(rng.uniform(0.7, 1.3)), float(rng.uniform(2.1, 3.4)))
            l = 3 if abs(3 - mp.r) > 0.2 and abs(4 - mp.r) > 0.2 and abs(2 - mp.r) > 0.2 else 5
            bp = BoundaryParams(c=complex(-rng.uniform(0.3, 0.5),
                                          math.pi / (2 * mp.epsilon) * (rng.random() < 0.5)),
                                l=l, u0=float(rng.uniform(0.5, 0.8)))
            worst = max(worst, boundary_ybe_residual(float(rng.uniform(0.05, 0.2)),
                                                     float(rng.uniform(0.03, 0.15)), bp, mp))
        assert worst <= 1e-8


class TestDiagonalSpecialization:
    def test_offdiagonals_vanish(self):
        mp = ModelParams(1.0, 2.4)
        K = diagonal_specialization(0.1, 0.3, mp).matrix
        scale = max(abs(K[0, 0]), abs(K[1, 1]))
        assert abs(K[0, 1]) <= 1e-9 * scale
        assert abs(K[1, 0]) <= 1e-9 * scale

    def test_ratio_matches_hyperbolic_form(self):
        mp = ModelParams(1.0, 2.4)
        for (u, c) in ((0.1, 0.3), (0.07, -0.35), (0.15, 0.2)):
            K = diagonal_specialization(u, c, mp).matrix
            ratio = K[0, 0] / K[1, 1]
            ref = diagonal_snh_ratio(u, c, mp)
            assert abs(ratio - ref) / abs(ref) <= 1e-9

    def test_real_c_lands_in_low_spectral_window(self):
        # the diagonal family at real c admits 0 < u < |c-window| < 1
        mp = ModelParams(1.0, 2.4)
        bp = diagonal_boundary_params(-0.3, mp)
        assert abs(complex(bp.l) - (mp.r / 2 + 0.3)) < 1e-14
        assert 0 < 0.1 < 0.3 < 1


class TestGeneralSolutionMatch:
    def test_proportionality(self):
        bp = BoundaryParams(c=-0.35 + 1j * math.pi / 2, l=3, u0=0.55)
        ik = ik_correspondence(0.07, BoundaryParams(c=bp.c, l=3, u0=0.55), ModelParams(1.0, 2.2))
        assert ik.residual <= 1e-8

    def test_real_c(self):
        ik = ik_correspondence(0.09, BoundaryParams(c=-0.45, l=2, u0=0.62), ModelParams(1.0, 2.4))
        assert ik.residual <= 1e-8

    def test_lambda_reconstruction(self):
        mp = ModelParams(1.0, 2.4)
        ik = ik_correspondence(0.09, BoundaryParams(c=-0.45, l=2, u0=0.62), mp)
        t0 = _theta_m2tau0(0, ik.a_prime, mp, DEFAULT_TRUNC)
        t1 = _theta_m2tau0(1, ik.a_prime, mp, DEFAULT_TRUNC)
        ref = (t0 ** 2 + t1 ** 2) / (t0 ** 2 - t1 ** 2)
        assert abs(ik.lambda_g - ref) <= 1e-9 * abs(ref)

    def test_sn_form_consistency(self):
        # the theta-factorized matrix against the hyperbolic parametrization
        mp = ModelParams(1.0, 2.4)
        ik = ik_correspondence(0.09, BoundaryParams(c=-0.45, l=2, u0=0.62), mp)
        em = modulus_from_nome(mp.p)
        u = 0.11
        xi_p, a_p = ik.xi_prime, ik.a_prime

        def sn_of(w):
            # sn at the elliptic argument corresponding to the additive w
            v = -1j * mp.epsilon * w / math.pi
            tau = 2j * mp.epsilon * mp.r / math.pi
            t3z = theta(3, 0.0, tau)
            t2z = theta(2, 0.0, tau)
            return (t3z / t2z) * theta(1, v, tau) / theta(4, v, tau)

        kg = _kbar_g_entries(u, xi_p, a_p, mp, DEFAULT_TRUNC)
        lhs = kg[0, 0] / kg[1, 1]
        rhs = (_theta_m2tau0(0, u - xi_p, mp, DEFAULT_TRUNC) * _theta_m2tau0(1, u + xi_p, mp, DEFAULT_TRUNC)) / (
            _theta_m2tau0(0, u + xi_p, mp, DEFAULT_TRUNC) * _theta_m2tau0(1, u - xi_p, mp, DEFAULT_TRUNC))
        assert abs(lhs - rhs) < 1e-12 * abs(rhs)
        # and the diagonal quotient matches sn(xi+u)/sn(xi-u)-type combination
        num = sn_of(xi_p + u) / sn_of(xi_p - u)
        assert abs(lhs / num - 1.0) < 1e-9

    def test_diagonal_point_degenerates(self):
        mp = ModelParams(1.0, 2.4)
        bp = diagonal_boundary_params(0.3, mp)
        K = vertex_k_explicit(0.08, bp, mp)
        assert abs(K[0, 1]) <= 1e-9 * abs(K[0, 0])
