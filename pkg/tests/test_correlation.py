import cmath
import math

import numpy as np
import pytest

from bxyz.elliptic import DEFAULT_TRUNC, ModelParams, bracket
from bxyz.correlation import (
    BoundaryData,
    NoSeparatingCircle,
    build_contour,
    closed_form_difference,
    closed_form_free_fermion_point,
    contour_integral,
    diagonal_boundary_data,
    g_constant,
    integrand_from_parts,
    integrand_general,
    magnetization_at_unit_xi,
    magnetization_diagonal,
    magnetization_difference,
    magnetization_difference_quadrature,
    magnetization_general,
    ope_factors,
    ope_phiphi,
    ope_phix,
    ope_xphi,
    ope_xx,
    pole_families,
    residue_at,
    vev_essential,
    xxz_limit_difference,
)
from bxyz.vertex import r_normalization

MP = ModelParams(1.0, 2.4)
BD = BoundaryData(c=-0.4 + 1j * math.pi / 2, l=3, u0=0.55)
XI = MP.xpow(2 * 0.2)
FF = 1j * math.pi / 2


class TestOpeFactors:
    def test_meromorphic_commutation(self):
        u1, u2 = 0.31, 0.12
        assert abs(ope_xx(u1, u2, MP) / ope_xx(u2, u1, MP)
                   - bracket(u1 - u2 - 1, MP) / bracket(u1 - u2 + 1, MP)) <= 1e-10
        assert abs(ope_phix(u1, u2, MP) / ope_xphi(u1, u2, MP)
                   + bracket(u1 - u2 + 0.5, MP) / bracket(u1 - u2 - 0.5, MP)) <= 1e-10
        assert abs(ope_phiphi(u1, u2, MP) / ope_phiphi(u2, u1, MP)
                   - r_normalization(u1 - u2, MP)[1]) <= 1e-10

    def test_bundle(self):
        fac = ope_factors(0.31, 0.12, MP)
        assert abs(fac.xx - ope_xx(0.31, 0.12, MP)) == 0
        assert abs(fac.phiphi - ope_phiphi(0.31, 0.12, MP)) == 0

    def test_g_constant_positive(self):
        assert g_constant(MP) > 0


class TestIntegrand:
    def test_two_assembly_routes(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(20):
            u1 = complex(rng.uniform(-0.05, 0.05), rng.uniform(-0.7, 0.7))
            a = integrand_general(XI, MP.xpow(2 * u1), BD, MP)
            b = integrand_from_parts(XI, u1, BD, MP)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
        assert worst <= 1e-10

    def test_removable_point(self):
        z = MP.xpow(-1.0) * XI  # cancelled zero/pole pair
        val = integrand_general(XI, z * (1 + 1e-8), BD, MP)
        assert np.isfinite(val)

    def test_simple_pole_growth(self):
        pole = MP.x * XI
        d1 = integrand_general(XI, pole * (1 + 1e-5), BD, MP)
        d2 = integrand_general(XI, pole * (1 + 1e-6), BD, MP)
        ratio = abs(d2) / abs(d1)
        assert 8.0 < ratio < 12.0  # 1/distance scaling

    def test_vev_symmetry_factor(self):
        # the squared-argument factor of the vacuum expectation is invariant
        # under z -> 1/z
        from bxyz.elliptic import theta_p

        z1 = 0.8 * cmath.exp(0.3j)
        a = theta_p(1.0 / z1 ** 2, MP.x ** 4)
        b = theta_p(z1 ** 2, MP.x ** 4)
        assert abs(a - b / z1 ** 2 * 1.0) / abs(a) < 5  # related by quasi-periodicity
        assert abs(theta_p(1.0 / z1 ** 2, MP.x ** 4)
                   - theta_p(MP.x ** 4 * z1 ** 2, MP.x ** 4) * (-1 / z1 ** 2)) < 1e-12 * abs(a)

    def test_vev_truncation_convergence(self):
        from bxyz.elliptic import TruncationConfig

        z1 = 0.8 * cmath.exp(0.3j)
        a = vev_essential(XI, z1, -0.4 + 1j * math.pi / 2, 3, MP,
                          TruncationConfig(product_tol=1e-12))
        b = vev_essential(XI, z1, -0.4 + 1j * math.pi / 2, 3, MP,
                          TruncationConfig(product_tol=1e-16))
        assert abs(a - b) / abs(b) < 1e-11

    def test_diagonal_sign_flip(self):
        rng = np.random.default_rng(5)
        bda = diagonal_boundary_data(FF, MP)
        bdb = diagonal_boundary_data(-MP.r - FF, MP)
        for _ in range(6):
            z1 = cmath.exp(1j * rng.uniform(0, 2 * math.pi)) * rng.uniform(0.85, 1.15)
            a = integrand_general(XI, z1, bda, MP)
            b = integrand_general(XI, z1, bdb, MP)
            assert abs(a + b) / max(abs(a), abs(b)) <= 1e-10

    def test_measure_transform(self):
        rng = np.random.default_rng(6)
        cc = 0.3
        for _ in range(6):
            z1 = cmath.exp(1j * rng.uniform(0, 2 * math.pi)) * rng.uniform(0.9, 1.1)
            w1 = 1.0 / (MP.x ** 2 * z1)
            a = integrand_general(1 / XI, z1, diagonal_boundary_data(-cc, MP), MP)
            b = -integrand_general(XI, w1, diagonal_boundary_data(cc, MP), MP)
            assert abs(a - b) / max(abs(a), abs(b)) <= 1e-10


class TestContours:
    def test_families_verified(self):
        spec = build_contour(XI, BD, MP, strict=False)
        inner, outer = spec.annulus
        for _, z in spec.inside_poles:
            if (None, z) and abs(z) < spec.radius:
                assert abs(z) <= inner + 1e-12
        assert inner < spec.radius < outer

    def test_symmetric_layout_at_unit_xi(self):
        bd = BoundaryData(c=-0.45, l=3, u0=0.55)
        spec = build_contour(1.0, bd, MP, strict=False)
        mods_in = [abs(z) for lbl, z in spec.inside_poles if lbl.startswith("xi")]
        mods_out = [abs(z) for lbl, z in spec.outside_poles if lbl.startswith("xi")]
        assert abs(max(mods_in) - MP.x) < 1e-12
        assert abs(min(mods_out) - 1 / MP.x) < 1e-12

    def test_no_separating_circle_on_collision(self):
        # v = c makes a prescribed-inside pole collide with an outside one
        bd = diagonal_boundary_data(0.3, MP)
        with pytest.raises(NoSeparatingCircle):
            build_contour(MP.xpow(2 * 0.3), bd, MP, strict=False)

    def test_strict_raises_on_interleaving(self):
        bd = diagonal_boundary_data(0.3, MP)
        with pytest.raises(NoSeparatingCircle):
            build_contour(1.0, bd, MP, strict=True)

    def test_pole_enumeration_range(self):
        inside, outside = pole_families(XI, BD, MP)
        assert all(1e-14 <= abs(z) <= 1e14 for _, z in inside + outside)


class TestQuadrature:
    def test_exponential_convergence(self):
        spec = build_contour(XI, BD, MP, strict=False)
        fn = lambda z: integrand_general(XI, z, BD, MP)
        v256, _, _ = contour_integral(fn, spec.radius, 256, 1e-16, 1)
        v512, _, _ = contour_integral(fn, spec.radius, 512, 1e-16, 1)
        assert abs(v512 - v256) <= 1e-10 * abs(v512)

    def test_radius_independence(self):
        spec = build_contour(XI, BD, MP, strict=False)
        fn = lambda z: integrand_general(XI, z, BD, MP)
        v0, _, _ = contour_integral(fn, spec.radius)
        vp, _, _ = contour_integral(fn, spec.radius * 1.1)
        vm, _, _ = contour_integral(fn, spec.radius * 0.9)
        assert abs(vp - v0) <= 1e-9 * abs(v0)
        assert abs(vm - v0) <= 1e-9 * abs(v0)

    def test_residue_theorem_across_band(self):
        fn = lambda z: integrand_general(XI, z, BD, MP)
        spec = build_contour(XI, BD, MP, strict=False)
        outer, _, _ = contour_integral(fn, spec.radius)
        inner, _, _ = contour_integral(fn, 0.02, 512, 1e-9)
        tot = sum(residue_at(fn, z, check=False) for _, z in spec.inside_poles
                  if 0.02 < abs(z) < spec.radius)
        assert abs((outer - inner) - tot) <= 1e-9 * max(abs(outer), 1.0)


class TestMagnetization:
    def test_free_fermion_closed_form(self):
        for v in (0.4, 0.2, 0.1):
            xi = MP.xpow(2 * v)
            M = magnetization_diagonal(xi, FF, MP)
            P = closed_form_free_fermion_point(xi, MP)
            assert abs(M.value - P) / abs(P) <= 1e-6
            assert abs(M.value.imag) <= 1e-9 * abs(M.value)

    def test_free_fermion_at_unit_xi(self):
        M = magnetization_at_unit_xi(diagonal_boundary_data(FF, MP), MP)
        P = closed_form_free_fermion_point(1.0, MP)
        assert abs(M.value - P) / abs(P) <= 1e-6

    def test_xi_inversion_symmetry(self):
        xi = MP.xpow(2 * 0.3)
        a = magnetization_diagonal(xi, 0.31, MP).value
        b = magnetization_diagonal(1 / xi, 0.31, MP).value
        assert abs(a - b) / abs(a) <= 1e-8

    def test_xi_inversion_general(self):
        a = magnetization_general(XI, BD, MP).value
        b = magnetization_general(1 / XI, BD, MP).value
        assert abs(a - b) / abs(a) <= 1e-8

    def test_residue_route(self):
        a = magnetization_general(XI, BD, MP).value
        b = magnetization_general(XI, BD, MP, route="residue_sum").value
        assert abs(a - b) / abs(a) <= 1e-7

    def test_reality_for_physical_parameters(self):
        M = magnetization_diagonal(1.0, 0.31, ModelParams(1.2, 3.0))
        assert abs(M.value.imag) <= 1e-9 * abs(M.value)

    def test_magnetization_bound_free_fermion(self):
        val = closed_form_free_fermion_point(1.0, MP)
        assert abs(val) <= 1.0

    def test_ff_product_invariant_under_inversion(self):
        xi = MP.xpow(2 * 0.35)
        assert abs(closed_form_free_fermion_point(xi, MP)
                   - closed_form_free_fermion_point(1 / xi, MP)) < 1e-14


class TestDifference:
    def test_residue_vs_closed(self):
        mp = ModelParams(1.0, 3.0)
        for c in (0.2, 0.35, 0.45):
            val = magnetization_difference(c, mp, verify_tol=1e-8)
            assert np.isfinite(val)

    def test_quadrature_combination(self):
        mp = ModelParams(1.0, 3.0)
        for c in (0.2, 0.35):
            closed = closed_form_difference(c, mp)
            quad = magnetization_difference_quadrature(c, mp)
            assert abs(closed - quad) / abs(closed) <= 1e-6

    def test_xxz_limit(self):
        mp = ModelParams(1.0, 40.0)
        for c in (0.2, 0.35, 0.5):
            a = closed_form_difference(c, mp)
            b = xxz_limit_difference(c, mp)
            assert abs(a - b) <= 1e-6 * max(abs(a), abs(b), 1.0)

    def test_degenerate_point_vanishes(self):
        mp = ModelParams(1.0, 3.0)
        assert abs(closed_form_difference(0.5, mp)) < 1e-12
