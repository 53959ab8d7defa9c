import math

import numpy as np
import pytest

from bxyz.elliptic import DEFAULT_TRUNC, ModelParams, bracket
from bxyz.sos import (
    FaceConfig,
    GroundSector,
    Region,
    SosBoundaryParams,
    _h_norm,
    boundary_crossing_residual,
    boundary_unitarity_residual,
    face_crossing_residual,
    face_unitarity_residual,
    ground_state_sector,
    heights_clear_of_lattice,
    k_diagonal,
    reflection_residual,
    sample_star_triangle_heights,
    star_triangle_residual,
    w_face,
)
from bxyz.vertex import r_normalization

MP = ModelParams(1.0, 2.5)
MP23 = ModelParams(1.0, 2.3)


class TestFaceWeights:
    def test_unit_weights_at_zero(self):
        assert abs(w_face(FaceConfig(3, 4, 4, 5, 0.0), MP) - 1.0) < 1e-14
        assert abs(w_face(FaceConfig(3, 4, 4, 3, 0.0), MP) - 1.0) < 1e-14
        assert abs(w_face(FaceConfig(3, 4, 2, 3, 0.0), MP)) < 1e-14

    def test_through_weight_is_normalization(self):
        val = w_face(FaceConfig(3, 4, 4, 5, 0.3), MP)
        assert abs(val - r_normalization(0.3, MP)[1]) < 1e-12

    def test_non_admissible_zero(self):
        assert w_face(FaceConfig(3, 5, 4, 5, 0.3), MP) == 0
        assert w_face(FaceConfig(3, 4, 4, 7, 0.3), MP) == 0

    def test_crossing(self):
        assert face_crossing_residual(5, 4, 4, 3, 0.23, MP23) <= 1e-11
        assert face_crossing_residual(4, 5, 3, 4, 0.37, MP23) <= 1e-11
        assert face_crossing_residual(5, 4, 4, 5, 0.29, MP23) <= 1e-11  # bounce pair

    def test_crossing_fixed_point(self):
        assert face_crossing_residual(5, 4, 4, 3, 0.5, MP23) <= 1e-11

    def test_star_triangle(self):
        rng = np.random.default_rng(3)
        for _ in range(6):
            hx = sample_star_triangle_heights(rng, MP23, 5)
            assert star_triangle_residual(hx, 0.3, 0.15, MP23) <= 1e-10

    def test_unitarity_structure(self):
        assert face_unitarity_residual(4, 3, 4, 3, 0.29, MP23) <= 1e-12
        assert face_unitarity_residual(4, 3, 4, 5, 0.29, MP23) <= 1e-12
        assert face_unitarity_residual(4, 3, 4, 3, 0.0, MP23) <= 1e-12


class TestDiagonalK:
    def setup_method(self):
        self.sbp = SosBoundaryParams(b=-0.4, region=Region.B, k=4)

    def test_identity_at_zero(self):
        K = k_diagonal(self.sbp, 1e-12, MP)
        assert abs(K.plus - 1.0) < 1e-10
        assert abs(K.minus - 1.0) < 1e-10

    def test_ratio_formula(self):
        u = 0.12
        K = k_diagonal(self.sbp, u, MP)
        c = self.sbp.c(MP)
        k = self.sbp.k
        ref = (bracket(c + u, MP) * bracket(k + c - u, MP)
               / (bracket(c - u, MP) * bracket(k + c + u, MP)))
        assert abs(K.plus / K.minus - ref) < 1e-12

    def test_boundary_unitarity(self):
        assert boundary_unitarity_residual(4, 0.12, self.sbp, MP) <= 1e-10

    def test_boundary_crossing(self):
        sbp = SosBoundaryParams(b=-0.45, region=Region.B, k=4)
        assert boundary_crossing_residual(4, 0.2, sbp, MP) <= 1e-8
        assert boundary_crossing_residual(4, 0.5, sbp, MP) <= 1e-9

    def test_h_unitarity(self):
        c = self.sbp.c(MP)
        prod = (_h_norm(0.13, c, 4, MP, DEFAULT_TRUNC, "lt")
                * _h_norm(-0.13, c, 4, MP, DEFAULT_TRUNC, "lt"))
        assert abs(prod - 1.0) < 1e-12

    def test_reflection_equation(self):
        assert reflection_residual(3, 0.1, 0.05,
                                   SosBoundaryParams(b=-0.5, region=Region.B, k=3), MP) <= 1e-9
        assert reflection_residual(3, 0.1, 0.1,
                                   SosBoundaryParams(b=-0.5, region=Region.B, k=3), MP) <= 1e-9
        assert reflection_residual(3, 0.1, 0.05,
                                   SosBoundaryParams(b=0.4, region=Region.A, k=3), MP) <= 1e-8

    def test_b_branches(self):
        for b in (0.5, -0.5):
            sbp = SosBoundaryParams(b=b, region=Region.B, k=3)
            assert boundary_unitarity_residual(3, 0.11, sbp, MP) <= 1e-10


class TestGroundSector:
    def test_positive_b(self):
        assert ground_state_sector(SosBoundaryParams(b=0.3, region=Region.B, k=4), MP) \
            is GroundSector.DIAGONAL

    def test_negative_b(self):
        assert ground_state_sector(SosBoundaryParams(b=-0.3, region=Region.B, k=4), MP) \
            is GroundSector.LOWERED

    def test_near_degenerate_warns(self):
        with pytest.warns(UserWarning):
            sector = ground_state_sector(SosBoundaryParams(b=-1e-9, region=Region.B, k=4), MP)
        assert sector is GroundSector.LOWERED

    def test_zero_b_rejected(self):
        with pytest.raises(ValueError):
            SosBoundaryParams(b=1.0, region=Region.B, k=4)
        with pytest.raises(ValueError):
            ground_state_sector(SosBoundaryParams(b=0.0, region=Region.B, k=4), MP)


def test_certified_window_sweep():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        mp = ModelParams(float(rng.uniform(0.5, 1.5)), float(rng.uniform(1.5, 4.0)))
        k = 4
        if not heights_clear_of_lattice((k,), mp, pad=2):
            continue
        b = float(rng.uniform(0.3, 0.8)) * (1 if rng.random() < 0.5 else -1)
        sbp = SosBoundaryParams(b=b, region=Region.B, k=k)
        u = 0.4 * abs(b)
        v = 0.2 * abs(b)
        hx = sample_star_triangle_heights(rng, mp, k)
        worst = max(worst,
                    star_triangle_residual(hx, u + v, v, mp),
                    face_unitarity_residual(k, k - 1, k, k + 1, u, mp),
                    face_crossing_residual(k, k - 1, k - 1, k, u, mp),
                    reflection_residual(k, u, v, sbp, mp),
                    boundary_unitarity_residual(k, u, sbp, mp),
                    boundary_crossing_residual(k, u, sbp, mp))
    assert worst <= 1e-8
