"""The invariant suite behind ``fresneltomo verify``.

Every check returns a :class:`Check` with the measured residual and the
tolerance it is held to.  Functions are grouped by acceptance criterion
(``criterion`` attribute) so the test suite can report them one per line.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels, symplectic
from .errors import ConfigError, ParseError
from .fockspace import (
    FockState, TruncationSpec, build_fresnel_operator, build_eta_state, build_xi_state,
    coherent_matrix_element, coherent_state, conjugation_residual, eigen_residual,
    fresnel_quadratures, fresnel_transform_state, group_law_residual, regularized_overlap,
    unitarity_residual,
)
from .kernels import ComplexField2D, GridSpec2D, adjoint_transform_field, fresnel_transform_field, inner_product
from .optics_dsl import evaluate, parse, render
from .states import Coherent, Vacuum, benchmark_states
from .symplectic import RayMatrix, SymplecticParams
from .tomography import (
    ProjectionParams, ReconstructionParams, forward_tomogram_eta, forward_tomogram_xi,
    fourier_slice_check, inverse_radon, l2_error, radon_labels, relative_error, tomogram_family,
)
from .wigner import UniformAxis, wigner_grid, wigner_values


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    criterion: int = 0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  [{self.criterion}] {self.name}: residual {self.residual:.3e} (tol {self.tolerance:.0e}){extra}"


def _check(name, residual, tol, criterion, detail=""):
    residual = float(residual)
    return Check(name, residual, tol, bool(np.isfinite(residual) and residual < tol), criterion, detail)


# -- 1: symplectic ------------------------------------------------------------

def check_symplectic(seed: int = 0, n: int = 1000) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_rt = worst_sr = worst_comp = 0.0
    for _ in range(n):
        m = symplectic.random_ray_matrix(rng)
        back = symplectic.sr_to_ray(symplectic.ray_to_sr(m))
        worst_rt = max(worst_rt, float(np.max(np.abs(back.as_array() - m.as_array()))))
        p = symplectic.random_params(rng)
        pb = symplectic.ray_to_sr(symplectic.sr_to_ray(p))
        worst_sr = max(worst_sr, abs(pb.s - p.s), abs(pb.r - p.r))
        m1, m2 = symplectic.random_ray_matrix(rng), symplectic.random_ray_matrix(rng)
        c = symplectic.compose(symplectic.ray_to_sr(m1), symplectic.ray_to_sr(m2))
        direct = symplectic.ray_to_sr(m1 @ m2)
        worst_comp = max(worst_comp, abs(c.s - direct.s), abs(c.r - direct.r))
    return [
        _check("ray -> (s,r) -> ray round trip", worst_rt, 1e-12, 1),
        _check("(s,r) -> ray -> (s,r) round trip", worst_sr, 1e-12, 1),
        _check("compose vs ABCD product", worst_comp, 1e-10, 1),
    ]


# -- 2: kernels ----------------------------------------------------------------

def check_kernels(seed: int = 1) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        m = symplectic.random_ray_matrix(rng)
        if abs(m.B) < 1e-3:
            continue
        p = symplectic.ray_to_sr(m)
        eo, ei = rng.normal(size=2) + 1j * rng.normal(size=2)
        ref = kernels.kernel_eta(m, eo, ei)
        worst = max(worst, abs(kernels.kernel_eta_sr(p, eo, ei) - ref) / abs(ref))
    out = [_check("(s,r) kernel vs ABCD kernel, 100 points", worst, 1e-10, 2)]

    grid = GridSpec2D(0j, 8.0, 64)
    g = ComplexField2D.sample(grid, lambda z: np.exp(-np.abs(z) ** 2))
    m1 = RayMatrix(1.0, 0.6, -0.4, 0.76)
    m2 = RayMatrix(0.8, 0.5, -0.3, 1.0625)
    # direct kernel quadrature throughout, so the kernel integral itself is tested
    q = "quadrature"
    two_step = fresnel_transform_field(m1, fresnel_transform_field(m2, g, grid, False, q), grid, False, q)
    one_step = fresnel_transform_field(m1 @ m2, g, grid, False, q)
    lhs, rhs = inner_product(g, two_step), inner_product(g, one_step)
    out.append(_check("kernel group law, Gaussian-smeared, 64^2 grid", abs(lhs - rhs) / abs(rhs), 1e-3, 2))
    back = adjoint_transform_field(m1, fresnel_transform_field(m1, g, grid, False, q), grid, q)
    out.append(_check("kernel unitarity, Gaussian-smeared", np.linalg.norm(back.values - g.values) / np.linalg.norm(g.values), 1e-3, 2))
    energy = abs(fresnel_transform_field(m1, g, grid, False, q).energy() / g.energy() - 1)
    out.append(_check("field transform conserves energy", energy, 5e-3, 2))

    # frequency-domain kernel against <xi'|F2|xi>/pi in Fock space
    lam = 0.2
    mx = RayMatrix(0.0, math.exp(-lam), -math.exp(lam), 0.0)
    p = symplectic.ray_to_sr(mx)
    t, tpad = TruncationSpec(32), TruncationSpec(64)
    worst = 0.0
    for _ in range(4):
        a, b = (rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform()) for _ in range(2))
        ket = fresnel_transform_state(p, build_xi_state(b, tpad)).truncate(32)
        val = regularized_overlap(build_xi_state(a, t), ket) / np.pi
        worst = max(worst, abs(val - kernels.kernel_xi(mx, a, b)))
    out.append(_check("frequency-domain kernel vs Fock-space matrix element", worst, 1e-3, 2))
    return out


# -- 3, 4: Fock space ----------------------------------------------------------

def check_fock(seed: int = 2) -> list[Check]:
    rng = np.random.default_rng(seed)
    t = TruncationSpec(24)
    k = 8

    def bounded(max_ratio=0.3):
        while True:
            p = symplectic.random_params(rng, max_r=0.32)
            if p.squeeze_ratio <= max_ratio:
                return p

    p1, p2 = bounded(0.2), bounded(0.2)
    p = bounded()
    out = [
        _check("F2 unitarity on sector n1+n2<=8", unitarity_residual(p, t, k), 1e-6, 3),
        _check("conjugation relations (ladder form and A1-A8)", conjugation_residual(p, t, k), 1e-6, 3),
        _check("operator group law", group_law_residual(p1, p2, t, k), 1e-6, 3),
    ]
    F = build_fresnel_operator(p, t)
    worst = 0.0
    for _ in range(5):
        z = rng.uniform(0, 1, 4) * np.exp(2j * np.pi * rng.uniform(size=4))
        bra, ket = coherent_state(z[0], z[1], t), coherent_state(z[2], z[3], t)
        num = complex(bra.vector.conj() @ (F.matrix @ ket.vector))
        ref = coherent_matrix_element(p, z[0], z[1], z[2], z[3])
        worst = max(worst, abs(num - ref) / abs(ref))
    out.append(_check("coherent-state matrix element of F2", worst, 1e-6, 3))
    return out


EIGEN_MATRIX = RayMatrix(1.1, 0.25, -0.3, (1 + 0.25 * -0.3) / 1.1)


def eigen_residuals(N: int, label: complex = 0.7 - 0.5j) -> dict:
    """Relative eigen-residuals of the transformed entangled states (both representations)."""
    t = TruncationSpec(N)
    p = symplectic.ray_to_sr(EIGEN_MATRIX)
    out = {}
    for rep, builder in (("eta", build_eta_state), ("xi", build_xi_state)):
        phi = fresnel_transform_state(p, builder(label, t))
        X1, X2 = fresnel_quadratures(EIGEN_MATRIX, t, rep)
        out[rep] = max(eigen_residual(X1, phi, math.sqrt(2) * label.real),
                       eigen_residual(X2, phi, math.sqrt(2) * label.imag))
    return out


def check_eigen() -> list[Check]:
    res = {N: eigen_residuals(N) for N in (16, 24, 32)}
    out = []
    for rep in ("eta", "xi"):
        seq = [res[N][rep] for N in (16, 24, 32)]
        mono = seq[0] > seq[1] > seq[2]
        detail = "N=16/24/32: " + ", ".join(f"{v:.1e}" for v in seq)
        c = _check(f"{rep}-side eigen-equations at N=32, decreasing in N", seq[2], 1e-3, 4, detail)
        c.passed = c.passed and mono
        out.append(c)
    return out


# -- 5, 6: tomography identities ------------------------------------------------

CENTRAL_MATRIX = RayMatrix(1.0, 0.7, -0.4, 0.72)


def _sample_points(seed=5, n=25):
    rng = np.random.default_rng(seed)
    return rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)


def central_identity(state, representation: str, m: RayMatrix = CENTRAL_MATRIX, t=None) -> float:
    t = t or TruncationSpec(24)
    e1, e2 = _sample_points()
    proj = ProjectionParams.diagonal(m, representation)
    wig = radon_labels(state, proj, e1, e2, t)
    from .fockspace import eta_sr_ket_params, gaussian_ket_amplitudes, xi_sr_ket_params

    params = eta_sr_ket_params if representation == "eta" else xi_sr_ket_params
    psi = state.fock(t).amplitudes
    kets = gaussian_ket_amplitudes(*params(m, e1 + 1j * e2), t.N)
    vec = np.abs(np.tensordot(psi, kets.conj(), axes=([0, 1], [0, 1]))) ** 2
    return relative_error(wig, vec)


def check_central(states=None) -> list[Check]:
    states = states or benchmark_states()
    out = []
    for name, st in states.items():
        for rep in ("eta", "xi"):
            out.append(_check(f"state-vector vs Radon-of-Wigner tomogram, {name}, {rep}", central_identity(st, rep), 1e-4, 5))
    # vacuum closed form from both routes
    m = CENTRAL_MATRIX
    e1, e2 = _sample_points()
    rho2 = m.B ** 2 + m.D ** 2
    closed = np.exp(-(e1 ** 2 + e2 ** 2) / rho2) / rho2
    wig = radon_labels(Vacuum(), ProjectionParams.diagonal(m), e1, e2)
    grid = GridSpec2D(0j, 2.0, 8)
    vec = forward_tomogram_eta(Vacuum(), m, grid, TruncationSpec(8)).values
    X = grid.points()
    closed_grid = np.exp(-np.abs(X) ** 2 / rho2) / rho2
    out.append(_check("vacuum closed form from the Wigner route", relative_error(wig, closed), 1e-4, 5))
    out.append(_check("vacuum closed form from the state-vector route", relative_error(vec, closed_grid), 1e-4, 5))
    return out


def check_normalization(states=None) -> list[Check]:
    states = states or benchmark_states()
    out = []
    t = TruncationSpec(24)
    grid = GridSpec2D(0j, 9.0, 96)
    ax = UniformAxis.symmetric(6.0, 25)
    for name, st in states.items():
        r_eta = abs(forward_tomogram_eta(st, CENTRAL_MATRIX, grid, t).normalization() - 1)
        r_xi = abs(forward_tomogram_xi(st, CENTRAL_MATRIX, grid, t).normalization() - 1)
        out.append(_check(f"tomogram completeness, {name}", max(r_eta, r_xi), 1e-3, 6))
        w = wigner_grid(st, (ax,) * 4, t)
        out.append(_check(f"Wigner normalization, {name}", abs(w.integral() - 1), 1e-3, 6))
    return out


# -- 7: Fourier slice --------------------------------------------------------

def check_fourier_slice(states=None, seed: int = 7) -> list[Check]:
    states = dict(states or benchmark_states())
    rng = np.random.default_rng(seed)
    zetas = rng.uniform(-1.5, 1.5, 5) + 1j * rng.uniform(-1.5, 1.5, 5)
    m = RayMatrix(1.0, 1.0, 0.0, 1.0)
    t = TruncationSpec(24)
    out = []
    for name, st in states.items():
        worst = max(abs(np.subtract(*fourier_slice_check(st, m, z, t))) for z in zetas)
        out.append(_check(f"Fourier-slice relation, {name}", worst, 1e-3, 7))
    return out


# -- 8: reconstruction -------------------------------------------------------

FBP_GRID = GridSpec2D(0j, 5.0, 64)
FBP_AXIS = UniformAxis.symmetric(3.0, 32)


def fbp_errors(state, angles=(16, 30, 60)) -> dict:
    ref = wigner_grid(state, (FBP_AXIS,) * 4)
    out = {}
    for n in angles:
        rec = inverse_radon(tomogram_family(state, n, FBP_GRID), ReconstructionParams(n, (FBP_AXIS,) * 4))
        out[n] = l2_error(rec, ref.values)
    return out


def check_reconstruction() -> list[Check]:
    out = []
    for name, st in (("vacuum", Vacuum()), ("coherent(0.7, 0.2i)", Coherent(0.7, 0.2j))):
        errs = fbp_errors(st)
        seq = [errs[n] for n in (16, 30, 60)]
        c = _check(f"FBP reconstruction, {name}, 60x60 angles", seq[-1], 0.05, 8,
                   "L2 at 16/30/60: " + ", ".join(f"{v:.4f}" for v in seq))
        c.passed = c.passed and seq[0] > seq[1] > seq[2]
        out.append(c)
    return out


# -- 9: parser -----------------------------------------------------------------

PARSER_FIXTURES = [
    ("free(2)", (1.0, 2.0, 0.0, 1.0)),
    ("lens(1) free(1)", (0.0, 1.0, -1.0, 1.0)),
    ("free(1) lens(1)", (1.0, 1.0, -1.0, 0.0)),
    ("free(2) lens(2) free(2)", (0.0, 2.0, -0.5, 0.0)),
    ("matrix(2, 0, 0, 0.5)", (2.0, 0.0, 0.0, 0.5)),
    ("  free( -1.5e-1 )\n  lens(+4)", None),
    ("free(0) free(0) free(0)", (1.0, 0.0, 0.0, 1.0)),
    ("matrix(1,0,0,2)", "determinant 2"),
    ("lens(0)", "lens(0)"),
    ("", "end of input"),
    ("free(1", "end of input"),
    ("free 1", "expected '('"),
    ("mirror(1)", "expected an element"),
    ("free(1,2)", "expected ')'"),
    ("free(1) $", "unexpected character"),
    ("lens(1e)", "expected"),
]


def run_parser_fixture(text, expected) -> bool:
    if isinstance(expected, str):
        try:
            parse(text)
        except ParseError as exc:
            return expected in str(exc)
        return False
    m = evaluate(parse(text))
    if expected is None:
        return evaluate(parse(render(parse(text)))) == m
    return m.as_array().tolist() == list(np.reshape(expected, (2, 2)).tolist())


def check_parser(seed: int = 9) -> list[Check]:
    failed = [text for text, exp in PARSER_FIXTURES if not run_parser_fixture(text, exp)]
    rng = np.random.default_rng(seed)
    additive = 0.0
    for _ in range(200):
        a, b = rng.uniform(-10, 10, 2)
        a, b = float(a), float(b)
        m = evaluate(parse(f"free({a!r}) free({b!r})"))
        additive = max(additive, abs(m.B - (a + b)), abs(m.A - 1), abs(m.C), abs(m.D - 1))
    return [
        _check(f"parser fixtures ({len(PARSER_FIXTURES)} cases)", len(failed), 0.5, 9, ", ".join(map(repr, failed))),
        _check("free-composition additivity (exact)", additive, 1e-300, 9),
    ]


# -- extras: Wigner cross-checks ------------------------------------------------

def check_wigner(seed: int = 11) -> list[Check]:
    from .wigner import PhasePoint, wigner_xi_form_check, wigner_value

    rng = np.random.default_rng(seed)
    t = TruncationSpec(24)
    states = benchmark_states()
    out = []
    S = rng.normal(size=5) + 1j * rng.normal(size=5)
    G = rng.normal(size=5) + 1j * rng.normal(size=5)
    for name in ("vacuum", "coherent", "tmsv"):
        st = states[name]
        q = wigner_values(st, S, G, t, method="quadrature")
        a = wigner_values(st, S, G, t)
        out.append(_check(f"closed-form Wigner vs quadrature, {name}", float(np.max(np.abs(q - a))), 1e-8, 6))
    worst = 0.0
    for name in ("coherent", "superposition"):
        for s, g in zip(S, G):
            pt = PhasePoint(s, g)
            worst = max(worst, abs(wigner_xi_form_check(states[name], pt, t) - wigner_value(states[name], pt, t, "quadrature")))
    out.append(_check("eta-form vs xi-form Wigner function", worst, 1e-4, 6))
    return out


GROUPS = {
    "symplectic": check_symplectic,
    "kernels": check_kernels,
    "fock": check_fock,
    "eigen": check_eigen,
    "central": check_central,
    "normalization": check_normalization,
    "wigner": check_wigner,
    "fourier": check_fourier_slice,
    "reconstruction": check_reconstruction,
    "parser": check_parser,
}


def run_all(groups=None, report=None) -> list[Check]:
    """Runs the selected groups (default: all) and returns every check."""
    names = list(GROUPS) if not groups else list(groups)
    unknown = [n for n in names if n not in GROUPS]
    if unknown:
        raise ConfigError(f"unknown check groups {unknown}; available: {sorted(GROUPS)}")
    results = []
    for name in names:
        start = time.perf_counter()
        checks = GROUPS[name]()
        for c in checks:
            c.detail = (c.detail + "; " if c.detail else "") + f"{time.perf_counter() - start:.1f}s group"
            if report:
                report(c)
        results.extend(checks)
    return results
