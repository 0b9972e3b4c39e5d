import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fresneltomo.errors import ConfigError, DegenerateTransformError
from fresneltomo.fockspace import TruncationSpec, build_eta_state, build_xi_state, fresnel_transform_state, regularized_overlap
from fresneltomo.kernels import (
    ComplexField2D, GridSpec2D, adjoint_transform_field, conjugate_matrix, fresnel_transform_field, inner_product,
    kernel_eta, kernel_eta_sr, kernel_xi, load_field, save_field,
)
from fresneltomo.symplectic import RayMatrix, random_ray_matrix, ray_to_sr

M = RayMatrix(1, 1, 0, 1)


def test_kernel_at_origin():
    assert kernel_eta(M, 0, 0) == pytest.approx(-1j / (2 * math.pi))


def test_sr_kernel_at_origin():
    assert kernel_eta_sr(ray_to_sr(M), 0, 0) == pytest.approx(-1j / (2 * math.pi))


def test_sr_denominator_equals_2iB():
    rng = np.random.default_rng(0)
    m = random_ray_matrix(rng)
    p = ray_to_sr(m)
    den = p.r.conjugate() + p.s.conjugate() - p.r - p.s
    assert den == pytest.approx(2j * m.B)


def test_kernel_modulus_constant():
    rng = np.random.default_rng(1)
    m = RayMatrix(0.5, -1.5, 0.2, 1.4)
    pts = rng.normal(size=(2, 50)) + 1j * rng.normal(size=(2, 50))
    assert np.allclose(np.abs(kernel_eta(m, pts[0], pts[1])), 1 / (2 * math.pi * 1.5))


def test_kernel_swap_symmetry():
    m = RayMatrix(0.5, -1.5, 0.2, 1.4)
    mt = RayMatrix(m.D, m.B, m.C, m.A)
    a, b = 0.3 - 0.7j, -1.1 + 0.2j
    assert kernel_eta(m, a, b) == pytest.approx(kernel_eta(mt, b, a))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_sr_form_matches_abcd_form(seed):
    rng = np.random.default_rng(seed)
    m = random_ray_matrix(rng)
    if abs(m.B) < 1e-3:
        return
    eo, ei = rng.normal(size=2) + 1j * rng.normal(size=2)
    ref = kernel_eta(m, eo, ei)
    assert abs(kernel_eta_sr(ray_to_sr(m), eo, ei) - ref) / abs(ref) < 1e-10


def test_singular_kernels_rejected():
    with pytest.raises(DegenerateTransformError):
        kernel_eta(RayMatrix(1, 0, 0, 1), 0, 0)
    with pytest.raises(DegenerateTransformError):
        kernel_xi(RayMatrix(1, 1, 0, 1), 0, 0)


def test_xi_kernel_at_origin():
    assert kernel_xi(RayMatrix(1, 0, -1, 1), 0, 0) == pytest.approx(-1j / (2 * math.pi))


def test_xi_kernel_modulus():
    m = RayMatrix(1, 0.3, -2.0, 0.4)
    assert abs(kernel_xi(m, 0.2 + 1j, -0.4)) == pytest.approx(1 / (2 * math.pi * 2.0))


def test_xi_kernel_is_eta_kernel_of_conjugate_matrix():
    m = RayMatrix(1, 0.3, -2.0, 0.4)
    assert kernel_xi(m, 0.2 + 1j, -0.4) == pytest.approx(kernel_eta(conjugate_matrix(m), 0.2 + 1j, -0.4))


def test_xi_kernel_against_fock_matrix_element():
    lam = 0.2
    m = RayMatrix(0.0, math.exp(-lam), -math.exp(lam), 0.0)
    p = ray_to_sr(m)
    t = TruncationSpec(32)
    rng = np.random.default_rng(8)
    for _ in range(3):
        a, b = (rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform()) for _ in range(2))
        ket = fresnel_transform_state(p, build_xi_state(b, TruncationSpec(64))).truncate(32)
        val = regularized_overlap(build_xi_state(a, t), ket) / math.pi
        assert abs(val - kernel_xi(m, a, b)) < 1e-3


def test_eta_kernel_against_fock_matrix_element():
    lam = 0.2
    m = RayMatrix(0.0, math.exp(-lam), -math.exp(lam), 0.0)
    t = TruncationSpec(32)
    a, b = 0.4 + 0.2j, -0.3 + 0.5j
    ket = fresnel_transform_state(ray_to_sr(m), build_eta_state(b, TruncationSpec(64))).truncate(32)
    val = regularized_overlap(build_eta_state(a, t), ket) / math.pi
    assert abs(val - kernel_eta(m, a, b)) < 1e-3


GRID = GridSpec2D(0j, 8.0, 64)
GAUSS = ComplexField2D.sample(GRID, lambda z: np.exp(-np.abs(z) ** 2))


def test_gaussian_transform_closed_form():
    out = fresnel_transform_field(M, GAUSS, GridSpec2D(0j, 4.0, 32))
    z = out.grid.points()
    a = 1 - 0.5j
    ref = (1 / (2j * math.pi)) * (math.pi / a) * np.exp(-np.abs(z) ** 2 / (4 * a) + 0.5j * np.abs(z) ** 2)
    assert np.max(np.abs(out.values - ref)) < 1e-10


def test_near_identity_limit():
    out = fresnel_transform_field(RayMatrix(1, 1e-3, 0, 1), GAUSS, GRID)
    err = np.linalg.norm(out.values - GAUSS.values) / np.linalg.norm(GAUSS.values)
    assert err < 1e-2


def test_energy_conserved():
    out = fresnel_transform_field(RayMatrix(0.8, 0.5, -0.3, 1.0625), GAUSS, GRID)
    assert out.energy() == pytest.approx(GAUSS.energy(), rel=5e-3)


def test_linearity():
    rng = np.random.default_rng(2)
    other = ComplexField2D.sample(GRID, lambda z: np.exp(-np.abs(z - 1) ** 2) * (1 + 1j * z.real))
    a, b = 0.3 - 1j, 2.0
    lhs = fresnel_transform_field(M, a * GAUSS + b * other, GRID)
    rhs = a * fresnel_transform_field(M, GAUSS, GRID) + b * fresnel_transform_field(M, other, GRID)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-13 * np.max(np.abs(rhs.values))


def test_smeared_group_law():
    m1, m2 = RayMatrix(1.0, 0.6, -0.4, 0.76), RayMatrix(0.8, 0.5, -0.3, 1.0625)
    two = fresnel_transform_field(m1, fresnel_transform_field(m2, GAUSS, GRID), GRID)
    one = fresnel_transform_field(m1 @ m2, GAUSS, GRID)
    lhs, rhs = inner_product(GAUSS, two), inner_product(GAUSS, one)
    assert abs(lhs - rhs) / abs(rhs) < 1e-3


def test_smeared_unitarity():
    out = fresnel_transform_field(M, GAUSS, GRID)
    back = adjoint_transform_field(M, out, GRID)
    assert np.linalg.norm(back.values - GAUSS.values) / np.linalg.norm(GAUSS.values) < 1e-3


def test_small_b_uses_resolved_path():
    m = RayMatrix(1, 0.05, 0, 1)
    fine = GridSpec2D(0j, 8.0, 256)
    ref = fresnel_transform_field(m, ComplexField2D.sample(fine, lambda z: np.exp(-np.abs(z) ** 2)), GRID)
    out = fresnel_transform_field(m, GAUSS, GRID)
    z = GRID.points()
    exact = np.exp(-np.abs(z) ** 2 / (1 + 2j * 0.05)) / (1 + 2j * 0.05)
    assert np.max(np.abs(out.values - exact)) < 1e-10
    assert np.max(np.abs(ref.values - exact)) < 1e-10


def test_spectral_and_quadrature_routes_agree():
    m = RayMatrix(-1.2, 0.7, 0.4, (1 + 0.28) / -1.2)
    field = ComplexField2D.sample(GRID, lambda z: np.exp(-np.abs(z - 0.5) ** 2) * (1 + 0.3j * z.imag))
    out = GridSpec2D(0.3j, 3.0, 32)
    a = fresnel_transform_field(m, field, out, method="quadrature").values
    b = fresnel_transform_field(m, field, out, method="spectral").values
    assert np.max(np.abs(a - b)) < 1e-8 * np.max(np.abs(a))


def test_unknown_method_rejected():
    with pytest.raises(ConfigError):
        fresnel_transform_field(M, GAUSS, GRID, method="fft")


def test_boundary_leakage_warns():
    wide = ComplexField2D.sample(GridSpec2D(0j, 2.0, 16), lambda z: np.exp(-np.abs(z) ** 2 / 4))
    with pytest.warns(RuntimeWarning, match="boundary"):
        fresnel_transform_field(M, wide, wide.grid)


def test_grid_layout():
    g = GridSpec2D(1 + 2j, 2.0, 8)
    assert g.re_axis()[4] == 1.0 and g.im_axis()[4] == 2.0
    assert g.points()[0, 1] == complex(g.re_axis()[1], g.im_axis()[0])


def test_grid_validation():
    with pytest.raises(ConfigError):
        GridSpec2D(0, 1.0, 7)
    with pytest.raises(ConfigError):
        GridSpec2D(0, -1.0, 8)


def test_field_csv_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    g = GridSpec2D(0.25 - 1j, 3.0, 8)
    f = ComplexField2D(g, rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    save_field(f, tmp_path / "f.csv")
    back = load_field(tmp_path / "f.csv")
    assert back.grid == g
    assert np.max(np.abs(back.values - f.values)) <= 1e-15 * np.max(np.abs(f.values))
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "re_axis,im_axis,re_value,im_value"


def test_field_loader_rejects_shape_mismatch(tmp_path):
    g = GridSpec2D(0, 1.0, 8)
    save_field(ComplexField2D(g, np.zeros((8, 8))), tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    (tmp_path / "f.csv").write_text("\n".join(lines[:-3]) + "\n")
    with pytest.raises(ConfigError, match="rows"):
        load_field(tmp_path / "f.csv")


def test_field_shape_checked():
    with pytest.raises(ConfigError):
        ComplexField2D(GridSpec2D(0, 1.0, 8), np.zeros((8, 6)))
