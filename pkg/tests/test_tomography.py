import json
import math

import numpy as np
import pytest

from fresneltomo.errors import ConfigError, DegenerateTransformError, NumericalError
from fresneltomo.fockspace import TruncationSpec
from fresneltomo.kernels import GridSpec2D
from fresneltomo.states import Coherent, FockSuperposition, Vacuum, tmsv_from_squeeze
from fresneltomo.symplectic import RayMatrix
from fresneltomo.tomography import (
    ProjectionParams, ReconstructionParams, TomogramGrid, canonicalize, forward_tomogram_eta, forward_tomogram_xi,
    fourier_slice_check, inverse_radon, l2_error, load_manifest, load_tomogram, midpoint_angles, radon_labels,
    radon_of_wigner, ramlak_kernel, relative_error, save_manifest, save_tomogram, tomogram_family,
)
from fresneltomo.wigner import UniformAxis, wavefunction, wigner_grid

T = TruncationSpec(24)
M = RayMatrix(1.0, 0.7, -0.4, 0.72)
SUPER = FockSuperposition(((0, 0, 1 / math.sqrt(2)), (1, 1, 1 / math.sqrt(2))))


def test_vacuum_free_propagation_peak():
    grid = GridSpec2D(0j, 4.0, 16)
    tomo = forward_tomogram_eta(Vacuum(), RayMatrix(1, 1, 0, 1), grid, T)
    assert tomo.values.max() == pytest.approx(0.5, abs=1e-12)
    assert tomo.values[8, 8] == tomo.values.max()


@pytest.mark.parametrize("rep", ["eta", "xi"])
def test_vacuum_closed_form(rep):
    grid = GridSpec2D(0.2 - 0.1j, 3.0, 16)
    fwd = forward_tomogram_eta if rep == "eta" else forward_tomogram_xi
    tomo = fwd(Vacuum(), M, grid, TruncationSpec(8))
    rho2 = M.D ** 2 + M.B ** 2 if rep == "eta" else M.A ** 2 + M.C ** 2
    X = grid.points()
    assert np.allclose(tomo.values, np.exp(-np.abs(X) ** 2 / rho2) / rho2, atol=1e-14)


@pytest.mark.parametrize("rep", ["eta", "xi"])
def test_vacuum_without_transform(rep):
    grid = GridSpec2D(0j, 3.0, 8)
    fwd = forward_tomogram_eta if rep == "eta" else forward_tomogram_xi
    tomo = fwd(Vacuum(), RayMatrix(1, 0, 0, 1), grid, T)
    assert np.allclose(tomo.values, np.exp(-np.abs(grid.points()) ** 2), atol=1e-15)
    wig = radon_of_wigner(Vacuum(), ProjectionParams((1, 0), (1, 0), rep), grid)
    assert relative_error(wig.values, tomo.values) < 1e-4


def test_identity_tomogram_is_wavefunction_density():
    grid = GridSpec2D(0j, 3.0, 8)
    tomo = forward_tomogram_eta(SUPER, RayMatrix(1, 0, 0, 1), grid, T)
    ref = np.abs(wavefunction(SUPER.fock(T), grid.points())) ** 2
    assert np.allclose(tomo.values, ref, atol=1e-14)


@pytest.mark.parametrize("st", [Vacuum(), Coherent(0.3, -0.2j), tmsv_from_squeeze(0.3), SUPER])
def test_normalization(st):
    grid = GridSpec2D(0j, 9.0, 96)
    assert forward_tomogram_eta(st, M, grid, T).check_normalization() < 1e-3
    assert forward_tomogram_xi(st, M, grid, T).check_normalization() < 1e-3


def test_tomogram_is_nonnegative():
    tomo = forward_tomogram_eta(SUPER, M, GridSpec2D(0j, 4.0, 16), T)
    assert tomo.values.min() >= 0


def test_negative_values_rejected():
    with pytest.raises(NumericalError, match="negative"):
        TomogramGrid(ProjectionParams((1, 0), (1, 0)), GridSpec2D(0, 1.0, 8), -np.ones((8, 8)))


def test_xi_equals_eta_of_conjugate_matrix_with_mode_parity():
    # |xi>_M = (-1)^{n2} |eta>_N with N = (D, -C, -B, A); (-1)^{n2} flips z2 of a coherent state
    z1, z2 = 0.4 + 0.1j, -0.3 + 0.5j
    N = RayMatrix(M.D, -M.C, -M.B, M.A)
    rng = np.random.default_rng(0)
    c = complex(*rng.uniform(-1, 1, 2))
    grid = GridSpec2D(c, 2.0, 8)
    a = forward_tomogram_xi(Coherent(z1, z2), M, grid, T).values
    b = forward_tomogram_eta(Coherent(z1, -z2), N, grid, T).values
    assert np.allclose(a, b, atol=1e-13)


def test_degenerate_matrix_rejected():
    with pytest.raises(DegenerateTransformError):
        forward_tomogram_eta(Vacuum(), RayMatrix(1e7, 1e-8, 0.0, 1e-7), GridSpec2D(0, 1.0, 8), T)


@pytest.mark.parametrize("rep", ["eta", "xi"])
def test_radon_of_wigner_matches_state_route(rep):
    grid = GridSpec2D(0.1j, 3.0, 16)
    fwd = forward_tomogram_eta if rep == "eta" else forward_tomogram_xi
    for st in (Coherent(0.3, -0.2j), tmsv_from_squeeze(0.3)):
        a = radon_of_wigner(st, ProjectionParams.diagonal(M, rep), grid).values
        assert relative_error(a, fwd(st, M, grid, T).values) < 1e-4


def test_radon_of_wigner_superposition_points():
    e1 = np.array([0.0, 0.8, -1.1])
    e2 = np.array([0.3, -0.5, 0.9])
    proj = ProjectionParams.diagonal(M)
    wig = radon_labels(SUPER, proj, e1, e2, T)
    vec = forward_tomogram_eta(SUPER, M, GridSpec2D(0, 2.0, 8), T)
    from fresneltomo.fockspace import eta_sr_ket_params, gaussian_ket_amplitudes

    kets = gaussian_ket_amplitudes(*eta_sr_ket_params(M, e1 + 1j * e2), T.N)
    ref = np.abs(np.tensordot(SUPER.fock(T).amplitudes, kets.conj(), axes=([0, 1], [0, 1]))) ** 2
    assert relative_error(wig, ref) < 1e-4
    assert vec.values.min() >= 0


def test_radon_scale_covariance():
    st = Coherent(0.4, -0.3j)
    c = 2.0
    grid = GridSpec2D(0.2j, 3.0, 16)
    base = ProjectionParams((M.D, M.B), (M.D, M.B))
    scaled = ProjectionParams((c * M.D, c * M.B), (c * M.D, c * M.B))
    a = radon_of_wigner(st, scaled, grid.scaled(c)).values
    b = radon_of_wigner(st, base, grid).values / c ** 2
    assert relative_error(a, b) < 1e-10


def test_projection_geometry():
    p = ProjectionParams((-1.0, 0.0), (0.0, 2.0))
    assert p.rho == (1.0, 2.0)
    assert p.theta == pytest.approx((0.0, math.pi / 2))
    assert p.signs == (-1, 1)


def test_canonicalize_folds_sign():
    grid = GridSpec2D(0j, 2.0, 8)
    st = Coherent(0.5, 0.1j)
    neg = radon_of_wigner(st, ProjectionParams((-1.0, 0.0), (1.0, 0.0)), grid)
    pos = radon_of_wigner(st, ProjectionParams((1.0, 0.0), (1.0, 0.0)), grid)
    cn, cp = canonicalize(neg), canonicalize(pos)
    # flipped axis covers -2+h .. 2 instead of -2 .. 2-h; compare the shared samples
    assert np.allclose(cn.ax1[:-1], cp.ax1[1:])
    assert np.allclose(cn.values[:, :-1], cp.values[:, 1:], atol=1e-12)


def test_fourier_slice_at_zero():
    lhs, rhs = fourier_slice_check(Vacuum(), RayMatrix(1, 1, 0, 1), 0.0, T)
    assert lhs == pytest.approx(math.pi, abs=1e-6)
    assert rhs == pytest.approx(math.pi, abs=1e-6)


def test_fourier_slice_vacuum_value():
    lhs, rhs = fourier_slice_check(Vacuum(), RayMatrix(1, 1, 0, 1), 1.0, T)
    assert lhs == pytest.approx(math.pi * math.exp(-0.5), abs=1e-6)
    assert rhs == pytest.approx(math.pi * math.exp(-0.5), abs=1e-6)


def test_fourier_slice_coherent():
    rng = np.random.default_rng(6)
    for zeta in rng.uniform(-1.5, 1.5, 5) + 1j * rng.uniform(-1.5, 1.5, 5):
        lhs, rhs = fourier_slice_check(Coherent(0.5, 0), RayMatrix(1, 1, 0, 1), zeta, T)
        assert abs(lhs - rhs) < 1e-3


def test_fourier_slice_superposition():
    lhs, rhs = fourier_slice_check(SUPER, M, 0.6 - 0.9j, T)
    assert abs(lhs - rhs) < 1e-3


def test_ramlak_center_value():
    h = ramlak_kernel(5, 0.1)
    K = math.pi / 0.1
    assert h[4] == pytest.approx(K ** 2 / (4 * math.pi ** 2))
    assert np.allclose(h, h[::-1])


GRID = GridSpec2D(0j, 5.0, 64)
AX = UniformAxis.symmetric(3.0, 16)


def test_fbp_is_linear():
    rp = ReconstructionParams(16, (AX,) * 4)
    f1 = tomogram_family(Vacuum(), 16, GRID)
    f2 = tomogram_family(Coherent(0.5, 0.2j), 16, GRID)
    mix = [TomogramGrid(a.proj, a.grid, 0.3 * a.values + 0.7 * b.values) for a, b in zip(f1, f2)]
    lhs = inverse_radon(mix, rp).values
    rhs = 0.3 * inverse_radon(f1, rp).values + 0.7 * inverse_radon(f2, rp).values
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * np.max(np.abs(rhs))


def test_projection_scale_is_redundant():
    rp = ReconstructionParams(16, (AX,) * 4)
    a = inverse_radon(tomogram_family(Vacuum(), 16, GRID), rp).values
    b = inverse_radon(tomogram_family(Vacuum(), 16, GRID.scaled(2.0), scale=2.0), rp).values
    assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(a))


def test_coherent_reconstruction_peak():
    st = Coherent(0.7, 0.2j)
    ax = UniformAxis.symmetric(3.0, 25)
    rec = inverse_radon(tomogram_family(st, 16, GRID), ReconstructionParams(16, (ax,) * 4))
    idx = np.unravel_index(np.argmax(rec.values), rec.values.shape)
    peak = np.array([ax.points[i] for i in idx])
    s0, g0 = st.sigma0, st.gamma0
    assert np.all(np.abs(peak - [s0.real, s0.imag, g0.real, g0.imag]) <= ax.spacing)


def test_reconstruction_error_small():
    rec = inverse_radon(tomogram_family(Vacuum(), 30, GRID), ReconstructionParams(30, (AX,) * 4))
    assert l2_error(rec, wigner_grid(Vacuum(), (AX,) * 4).values) < 0.05


def test_too_few_angles_rejected():
    with pytest.raises(ConfigError, match="minimum of 16"):
        ReconstructionParams(8, (AX,) * 4)


def test_reconstruction_params_collect_all_problems():
    with pytest.raises(ConfigError) as info:
        ReconstructionParams(4, (AX,) * 3, r_max=-1.0)
    msg = str(info.value)
    assert "n_angles" in msg and "r_max" in msg and "four axes" in msg


def test_wrong_family_size_rejected():
    fam = tomogram_family(Vacuum(), 16, GRID)
    with pytest.raises(ConfigError):
        inverse_radon(fam[:-1], ReconstructionParams(16, (AX,) * 4))


def test_mismatched_grid_names_file():
    fam = tomogram_family(Vacuum(), 16, GRID)
    odd = tomogram_family(Vacuum(), 16, GridSpec2D(0j, 4.0, 64))
    fam[5] = odd[5]
    names = [f"t{i:03d}.json" for i in range(len(fam))]
    with pytest.raises(ConfigError, match="t005.json"):
        inverse_radon(fam, ReconstructionParams(16, (AX,) * 4), names)


def test_xi_tomograms_not_back_projected():
    tomo = forward_tomogram_xi(Vacuum(), M, GridSpec2D(0, 2.0, 8), T)
    with pytest.raises(ConfigError):
        canonicalize(tomo)


def test_midpoint_angles():
    th = midpoint_angles(4)
    assert np.allclose(th, [math.pi / 8, 3 * math.pi / 8, 5 * math.pi / 8, 7 * math.pi / 8])


@pytest.mark.parametrize("fmt", ["csv", "bin"])
def test_tomogram_round_trip(tmp_path, fmt):
    tomo = forward_tomogram_eta(Coherent(0.2, 0.1j), M, GridSpec2D(0.5 - 0.25j, 3.0, 8), T)
    meta = save_tomogram(tomo, tmp_path / "t", fmt)
    back = load_tomogram(meta)
    assert back.proj == tomo.proj and back.grid == tomo.grid
    assert np.array_equal(back.values, tomo.values)
    assert json.loads(meta.read_text())["format"] == fmt


def test_tomogram_csv_header(tmp_path):
    tomo = forward_tomogram_eta(Vacuum(), M, GridSpec2D(0, 1.0, 8), T)
    save_tomogram(tomo, tmp_path / "t")
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "eta1,eta2,value"


def test_truncated_csv_rejected(tmp_path):
    tomo = forward_tomogram_eta(Vacuum(), M, GridSpec2D(0, 1.0, 8), T)
    save_tomogram(tomo, tmp_path / "t")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    (tmp_path / "t.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ConfigError, match="rows"):
        load_tomogram(tmp_path / "t.json")


def test_manifest_round_trip(tmp_path):
    rp = ReconstructionParams(16, (AX,) * 4, r_max=12.0)
    paths = [tmp_path / "a.json", tmp_path / "sub" / "b.json"]
    save_manifest(paths, rp, tmp_path / "m.json", Vacuum())
    got, rp2, state = load_manifest(tmp_path / "m.json")
    assert got == paths
    assert rp2 == rp
    assert state == {"kind": "vacuum"}
    assert json.loads((tmp_path / "m.json").read_text())["tomograms"][1] == "sub/b.json"


def test_manifest_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_manifest(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError, match="JSON"):
        load_manifest(tmp_path / "bad.json")
