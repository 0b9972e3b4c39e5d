"""Tomograms, their Radon-transform relation to the Wigner function, and
filtered back-projection.

Line constraints (eta representation, pairs (D, B)):
    eta1 = D1 sigma1 - B1 gamma2      on the plane (sigma1, gamma2)
    eta2 = D2 sigma2 + B2 gamma1      on the plane (sigma2, gamma1)
Conjugate representation, pairs (A, C):
    xi1 = A1 gamma1 + C1 sigma2       on the plane (sigma2, gamma1)
    xi2 = A2 gamma2 - C2 sigma1       on the plane (sigma1, gamma2)
and T = pi * int d^4x W delta(label1 - L1) delta(label2 - L2).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .fockspace import FockState, TruncationSpec, eta_sr_ket_params, gaussian_ket_amplitudes, xi_sr_ket_params
from .kernels import GridSpec2D
from .symplectic import RayMatrix
from .wigner import UniformAxis, WignerGrid4D, _trim, quadrature_wigner, tensor_quadrature

NORMALIZATION_TOL = 1e-3
NEGATIVE_TOL = 1e-9
MIN_ANGLES = 16


@dataclass(frozen=True)
class ProjectionParams:
    pair1: tuple
    pair2: tuple
    representation: str = "eta"

    def __post_init__(self):
        p1 = tuple(float(v) for v in self.pair1)
        p2 = tuple(float(v) for v in self.pair2)
        if len(p1) != 2 or len(p2) != 2:
            raise ConfigError("projection pairs must have two entries each")
        for name, p in (("pair1", p1), ("pair2", p2)):
            if math.hypot(*p) <= 0.0 or not all(math.isfinite(v) for v in p):
                raise ConfigError(f"{name} = {p} must be finite and not both zero")
        if self.representation not in ("eta", "xi"):
            raise ConfigError(f"representation must be 'eta' or 'xi', got {self.representation!r}")
        object.__setattr__(self, "pair1", p1)
        object.__setattr__(self, "pair2", p2)

    @classmethod
    def diagonal(cls, m: RayMatrix, representation: str = "eta") -> "ProjectionParams":
        pair = (m.D, m.B) if representation == "eta" else (m.A, m.C)
        return cls(pair, pair, representation)

    @classmethod
    def from_angles(cls, theta1: float, theta2: float) -> "ProjectionParams":
        return cls((math.cos(theta1), math.sin(theta1)), (math.cos(theta2), math.sin(theta2)))

    @property
    def rho(self) -> tuple:
        return math.hypot(*self.pair1), math.hypot(*self.pair2)

    @property
    def theta(self) -> tuple:
        return tuple(math.atan2(p[1], p[0]) % math.pi for p in (self.pair1, self.pair2))

    @property
    def signs(self) -> tuple:
        """+1 if (first, second) = rho (cos theta, sin theta), -1 if its negative."""
        out = []
        for p, th in zip((self.pair1, self.pair2), self.theta):
            out.append(1 if p[0] * math.cos(th) + p[1] * math.sin(th) > 0 else -1)
        return tuple(out)

    def lines(self):
        """[(plane, a)] for label1, label2: plane 1 = (sigma1, gamma2), plane 2 = (sigma2, gamma1),
        and the label is a . (plane coordinates)."""
        (u1, w1), (u2, w2) = self.pair1, self.pair2
        if self.representation == "eta":
            return [(1, np.array([u1, -w1])), (2, np.array([u2, w2]))]
        return [(2, np.array([w1, u1])), (1, np.array([-w2, u2]))]

    def to_dict(self):
        return {"pair1": list(self.pair1), "pair2": list(self.pair2), "representation": self.representation}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["pair1"]), tuple(d["pair2"]), d.get("representation", "eta"))


@dataclass
class TomogramGrid:
    """values[j, i] = T(eta1 = grid.re_axis[i], eta2 = grid.im_axis[j])."""

    proj: ProjectionParams
    grid: GridSpec2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, float)
        if v.shape != (self.grid.n, self.grid.n):
            raise ConfigError(f"tomogram values shape {v.shape} does not match a {self.grid.n}^2 grid")
        if v.size and v.min() < -NEGATIVE_TOL * max(1.0, float(np.max(np.abs(v)))):
            raise NumericalError(f"tomogram has negative value {v.min():.3e}")
        self.values = np.clip(v, 0.0, None)

    def normalization(self) -> float:
        """int (d^2 eta / pi) T."""
        return float(np.sum(self.values * self.grid.weights()) / np.pi)

    def check_normalization(self, tol: float = NORMALIZATION_TOL) -> float:
        resid = abs(self.normalization() - 1.0)
        if resid > tol:
            raise NumericalError(f"tomogram normalization off by {resid:.2e} > {tol:g}; enlarge the grid or cutoff")
        return resid


# -- state-vector route ------------------------------------------------------

def _state_psi(state, t):
    if isinstance(state, FockState):
        return state
    return state.fock(t or TruncationSpec(24))


def _forward(state, params_fn, grid: GridSpec2D, t, proj):
    psi = _state_psi(state, t)
    amps = _trim(psi).amps
    n = amps.shape[0]
    pts = grid.points()
    vals = np.empty(pts.shape)
    for j in range(pts.shape[0]):
        kets = gaussian_ket_amplitudes(*params_fn(pts[j]), n)
        vals[j] = np.abs(np.tensordot(amps, kets.conj(), axes=([0, 1], [0, 1]))) ** 2
    return TomogramGrid(proj, grid, vals)


def forward_tomogram_eta(state, m: RayMatrix, grid: GridSpec2D, t: TruncationSpec | None = None) -> TomogramGrid:
    """T(eta) = |<eta| F2^+ |psi>|^2 from the closed-form transformed ket."""
    m.check(1e-9)
    eta_sr_ket_params(m, 0.0)  # degeneracy check up front
    return _forward(state, lambda e: eta_sr_ket_params(m, e), grid, t, ProjectionParams.diagonal(m, "eta"))


def forward_tomogram_xi(state, m: RayMatrix, grid: GridSpec2D, t: TruncationSpec | None = None) -> TomogramGrid:
    """T(xi) = |<xi| F2^+ |psi>|^2 in the conjugate representation."""
    m.check(1e-9)
    xi_sr_ket_params(m, 0.0)
    return _forward(state, lambda x: xi_sr_ket_params(m, x), grid, t, ProjectionParams.diagonal(m, "xi"))


# -- Wigner route ------------------------------------------------------------

def _line_geometry(a):
    rho = float(np.hypot(*a))
    n = a / rho
    return rho, n, np.array([-n[1], n[0]])


def _gaussian_line_integral(f, a, labels):
    """int dv f(label/rho n + v t) for a plane Gaussian f; one value per label."""
    rho, n, tvec = _line_geometry(a)
    M = np.asarray(f.M, float)
    smin = np.linalg.svd(M, compute_uv=False).min()
    c = np.asarray(f.c, float)
    half = 12.0 / smin
    v = np.linspace(tvec @ c - half, tvec @ c + half, 1601)
    h = v[1] - v[0]
    w = np.full(v.size, h)
    w[0] = w[-1] = h / 2
    u = np.asarray(labels, float)[:, None] / rho
    vals = f(u * n[0] + v[None, :] * tvec[0], u * n[1] + v[None, :] * tvec[1])
    return vals @ w


def _plane_to_phase(plane1_xy, plane2_xy):
    """Plane coordinates -> (sigma, gamma)."""
    (s1, g2), (s2, g1) = plane1_xy, plane2_xy
    return s1 + 1j * s2, g1 + 1j * g2


def _generic_radon(psi: FockState, proj: ProjectionParams, labels1, labels2):
    """Gauss-Hermite nodes along both lines.  A truncated Fock state has
    W = exp(-|sigma|^2 - |gamma|^2) * polynomial, so the rule is exact once
    the node count exceeds the polynomial degree; two orders are compared."""
    tr = _trim(psi)
    deg = 2 * (tr.amps.shape[0] - 1)
    (pl1, a1), (pl2, a2) = proj.lines()
    rho1, n1, t1 = _line_geometry(a1)
    rho2, n2, t2 = _line_geometry(a2)
    labels1 = np.asarray(labels1, float)
    labels2 = np.asarray(labels2, float)
    results = []
    for order in (deg // 2 + 6, deg // 2 + 10):
        v, w = np.polynomial.hermite.hermgauss(order)
        w = w * np.exp(v ** 2)
        V1, V2 = np.meshgrid(v, v, indexing="ij")
        e1 = labels1[:, None, None] / rho1
        e2 = labels2[:, None, None] / rho2
        x1 = (e1 * n1[0] + V1 * t1[0], e1 * n1[1] + V1 * t1[1])
        x2 = (e2 * n2[0] + V2 * t2[0], e2 * n2[1] + V2 * t2[1])
        planes = {pl1: x1, pl2: x2}
        sigma, gamma = _plane_to_phase(planes[1], planes[2])
        W = quadrature_wigner(psi, sigma, gamma, "eta")
        results.append(np.einsum("kij,i,j->k", W, w, w) * math.pi / (rho1 * rho2))
    diff = float(np.max(np.abs(results[0] - results[1])))
    if diff > 1e-8:
        raise NumericalError(f"Radon line integral did not converge (order refinement changed it by {diff:.2e})")
    return results[1]


def radon_labels(state, proj: ProjectionParams, labels1, labels2, t: TruncationSpec | None = None) -> np.ndarray:
    """pi int W over the two line constraints, at paired label values."""
    labels1 = np.asarray(labels1, float).ravel()
    labels2 = np.asarray(labels2, float).ravel()
    if getattr(state, "gaussian", False):
        f = dict(zip((1, 2), state.plane_factors()))
        (pl1, a1), (pl2, a2) = proj.lines()
        g1 = _gaussian_line_integral(f[pl1], a1, labels1)
        g2 = _gaussian_line_integral(f[pl2], a2, labels2)
        rho1, rho2 = proj.rho
        return math.pi * g1 * g2 / (rho1 * rho2)
    return _generic_radon(_state_psi(state, t), proj, labels1, labels2)


def radon_of_wigner(state, proj: ProjectionParams, grid: GridSpec2D, t: TruncationSpec | None = None) -> TomogramGrid:
    """Tomogram on a grid from the Wigner function.  Gaussian states factor
    into two one-dimensional line integrals; other states integrate the
    quadrature Wigner function over both line directions."""
    e1, e2 = grid.re_axis(), grid.im_axis()
    if getattr(state, "gaussian", False):
        f = dict(zip((1, 2), state.plane_factors()))
        (pl1, a1), (pl2, a2) = proj.lines()
        g1 = _gaussian_line_integral(f[pl1], a1, e1)
        g2 = _gaussian_line_integral(f[pl2], a2, e2)
        rho1, rho2 = proj.rho
        vals = math.pi * np.outer(g2, g1) / (rho1 * rho2)
    else:
        E1, E2 = np.meshgrid(e1, e2)
        vals = radon_labels(state, proj, E1, E2, t).reshape(E1.shape)
    return TomogramGrid(proj, grid, vals)


def relative_error(a, b) -> float:
    """max|a - b| / max|b|."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


# -- Fourier slice -----------------------------------------------------------

def fourier_slice_check(state, m: RayMatrix, zeta: complex, t: TruncationSpec | None = None,
                        grid: GridSpec2D | None = None) -> tuple[complex, complex]:
    """(int d^2eta T(eta) e^{-i(z1 eta1 + z2 eta2)},  pi int d^4x W e^{-i(z1 L1 + z2 L2)})."""
    zeta = complex(zeta)
    proj = ProjectionParams.diagonal(m, "eta")
    rho = max(proj.rho)
    ext = getattr(state, "extent", lambda: 0.0)()
    if grid is None:
        grid = GridSpec2D(0j, 7.0 * rho + rho * ext + 2.0, 128)
    tomo = forward_tomogram_eta(state, m, grid, t)
    X = grid.points()
    lhs = complex(np.sum(tomo.values * np.exp(-1j * (zeta.real * X.real + zeta.imag * X.imag)) * grid.weights()))

    (pl1, a1), (pl2, a2) = proj.lines()
    half = 7.0 + ext
    if getattr(state, "gaussian", False):
        ax = UniformAxis.symmetric(half, 161)
        x = ax.points
        w = ax.weights()
        P, Q = np.meshgrid(x, x, indexing="ij")
        f1, f2 = state.plane_factors()
        i1 = np.einsum("ij,i,j->", f1(P, Q) * np.exp(-1j * zeta.real * (a1[0] * P + a1[1] * Q)), w, w)
        i2 = np.einsum("ij,i,j->", f2(P, Q) * np.exp(-1j * zeta.imag * (a2[0] * P + a2[1] * Q)), w, w)
        rhs = math.pi * i1 * i2
    else:
        # W = exp(-|x|^2) * polynomial for a truncated Fock state: Gauss-Hermite in 4D
        psi = _state_psi(state, t)
        order = _trim(psi).amps.shape[0] + 8
        v, w = np.polynomial.hermite.hermgauss(order)
        w = w * np.exp(v ** 2)
        s1, s2, g1, g2 = np.meshgrid(v, v, v, v, indexing="ij")
        W = tensor_quadrature(psi, v, v, v, v)
        phase = np.exp(-1j * (zeta.real * (a1[0] * s1 + a1[1] * g2) + zeta.imag * (a2[0] * s2 + a2[1] * g1)))
        rhs = math.pi * np.einsum("ijkl,i,j,k,l->", W * phase, w, w, w, w)
    return lhs, complex(rhs)


# -- families and back-projection ---------------------------------------------

def midpoint_angles(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) * math.pi / n


def tomogram_family(state, n_angles: int, grid: GridSpec2D, t: TruncationSpec | None = None,
                    scale: float = 1.0) -> list[TomogramGrid]:
    """Independent-angle family (theta1, theta2) on the midpoint product grid,
    pairs scale * (cos theta, sin theta), via the Wigner route."""
    th = midpoint_angles(n_angles)
    if getattr(state, "gaussian", False):
        f = dict(zip((1, 2), state.plane_factors()))
        e1, e2 = grid.re_axis(), grid.im_axis()
        g1, g2 = [], []
        for a in th:
            proj = ProjectionParams.from_angles(a, a)
            (pl1, a1), (pl2, a2) = proj.lines()
            g1.append(_gaussian_line_integral(f[pl1], scale * a1, e1))
            g2.append(_gaussian_line_integral(f[pl2], scale * a2, e2))
        out = []
        for i, a in enumerate(th):
            for j, b in enumerate(th):
                proj = ProjectionParams(scale * np.array([math.cos(a), math.sin(a)]),
                                        scale * np.array([math.cos(b), math.sin(b)]))
                out.append(TomogramGrid(proj, grid, math.pi * np.outer(g2[j], g1[i]) / scale ** 2))
        return out
    out = []
    for a in th:
        for b in th:
            proj = ProjectionParams(scale * np.array([math.cos(a), math.sin(a)]),
                                    scale * np.array([math.cos(b), math.sin(b)]))
            out.append(radon_of_wigner(state, proj, grid, t))
    return out


@dataclass(frozen=True)
class ReconstructionParams:
    n_angles: int
    output_axes: tuple
    r_max: float | None = None
    interpolation: str = field(default="bilinear")

    def __post_init__(self):
        problems = []
        if int(self.n_angles) < MIN_ANGLES:
            problems.append(f"n_angles = {self.n_angles} is below the minimum of {MIN_ANGLES} per angle axis")
        if self.r_max is not None and not self.r_max > 0:
            problems.append(f"r_max = {self.r_max} must be positive")
        if len(tuple(self.output_axes)) != 4:
            problems.append("output_axes needs four axes (sigma1, sigma2, gamma1, gamma2)")
        if self.interpolation != "bilinear":
            problems.append("interpolation is fixed to bilinear")
        if problems:
            raise ConfigError("; ".join(problems))
        object.__setattr__(self, "output_axes", tuple(self.output_axes))

    def to_dict(self):
        return {
            "n_angles": int(self.n_angles),
            "r_max": self.r_max,
            "output_axes": [a.to_dict() for a in self.output_axes],
            "interpolation": self.interpolation,
        }

    @classmethod
    def from_dict(cls, d):
        axes = d.get("output_axes")
        if axes is None:
            half, n = float(d.get("output_half_extent", 3.0)), int(d.get("output_samples", 32))
            axes = [UniformAxis.symmetric(half, n).to_dict()] * 4
        return cls(int(d["n_angles"]), tuple(UniformAxis.from_dict(a) for a in axes), d.get("r_max"))


def ramlak_kernel(n: int, tau: float, r_max: float | None = None) -> np.ndarray:
    """Spatial filter h(k tau), k = -(n-1)..(n-1), for the ramp |r| cut at r_max
    (angular frequency); the default cutoff is the grid Nyquist pi / tau."""
    K = math.pi / tau if r_max is None else min(float(r_max), math.pi / tau)
    t = np.arange(-(n - 1), n) * tau
    h = np.empty(t.size)
    nz = t != 0
    tt = t[nz]
    h[nz] = (K * np.sin(K * tt) / tt + (np.cos(K * tt) - 1.0) / tt ** 2) / (2 * math.pi ** 2)
    h[~nz] = K ** 2 / (4 * math.pi ** 2)
    return h


def _filter_matrix(n, tau, r_max):
    h = ramlak_kernel(n, tau, r_max)
    idx = np.arange(n)
    return tau * h[(idx[:, None] - idx[None, :]) + n - 1]


def _hat_weights(u, axis):
    """Bilinear (hat) interpolation weights, rows = query points, zero outside."""
    x0, h, n = axis[0], axis[1] - axis[0], axis.size
    f = (u - x0) / h
    i = np.floor(f).astype(int)
    frac = f - i
    Wt = np.zeros((u.size, n))
    rows = np.arange(u.size)
    for k, wk in ((i, 1 - frac), (i + 1, frac)):
        ok = (k >= 0) & (k < n)
        Wt[rows[ok], k[ok]] += wk[ok]
    return Wt


@dataclass
class _Canonical:
    theta1: float
    theta2: float
    ax1: np.ndarray
    ax2: np.ndarray
    values: np.ndarray  # [eta2, eta1]


def canonicalize(tomo: TomogramGrid) -> _Canonical:
    """Rescale to rho = 1 and fold the sign so theta lies in [0, pi)."""
    if tomo.proj.representation != "eta":
        raise ConfigError("back-projection takes eta-representation tomograms")
    rho1, rho2 = tomo.proj.rho
    sg1, sg2 = tomo.proj.signs
    th1, th2 = tomo.proj.theta
    ax1 = tomo.grid.re_axis() / rho1 * sg1
    ax2 = tomo.grid.im_axis() / rho2 * sg2
    vals = tomo.values * (rho1 * rho2)
    if sg1 < 0:
        ax1, vals = ax1[::-1], vals[:, ::-1]
    if sg2 < 0:
        ax2, vals = ax2[::-1], vals[::-1, :]
    return _Canonical(th1, th2, ax1, ax2, vals)


def inverse_radon(tomograms, rp: ReconstructionParams, names=None) -> WignerGrid4D:
    """Filtered back-projection over the independent (theta1, theta2) family.

    W(x) = (1/pi) sum dtheta1 dtheta2 Q(u1, u2), Q the separable ramp-filtered
    canonical tomogram, u1 = sigma1 cos th1 - gamma2 sin th1,
    u2 = sigma2 cos th2 + gamma1 sin th2.
    """
    names = names or [f"tomogram[{i}]" for i in range(len(tomograms))]
    canon = [canonicalize(t) for t in tomograms]
    n = rp.n_angles
    expected = midpoint_angles(n)
    if len(canon) != n * n:
        raise ConfigError(f"expected {n}x{n} = {n * n} tomograms for n_angles = {n}, got {len(canon)}")
    ref = canon[0]
    lookup = {}
    for c, name in zip(canon, names):
        if c.ax1.shape != ref.ax1.shape or c.ax2.shape != ref.ax2.shape or not (
            np.allclose(c.ax1, ref.ax1, rtol=0, atol=1e-12) and np.allclose(c.ax2, ref.ax2, rtol=0, atol=1e-12)
        ):
            raise ConfigError(f"{name}: tomogram grid does not match the first tomogram's grid")
        k1 = np.abs(expected - c.theta1).argmin()
        k2 = np.abs(expected - c.theta2).argmin()
        if abs(expected[k1] - c.theta1) > 1e-9 or abs(expected[k2] - c.theta2) > 1e-9:
            raise ConfigError(f"{name}: angles ({c.theta1:.6f}, {c.theta2:.6f}) are not on the {n}-point midpoint grid")
        if (k1, k2) in lookup:
            raise ConfigError(f"{name}: duplicate angle pair ({k1}, {k2})")
        lookup[(k1, k2)] = c
    ax1, ax2 = ref.ax1, ref.ax2
    H1 = _filter_matrix(ax1.size, ax1[1] - ax1[0], rp.r_max)
    H2 = _filter_matrix(ax2.size, ax2[1] - ax2[0], rp.r_max)

    s1, s2, g1, g2 = (a.points for a in rp.output_axes)
    P1s, P1g = np.meshgrid(s1, g2, indexing="ij")   # plane (sigma1, gamma2)
    P2s, P2g = np.meshgrid(s2, g1, indexing="ij")   # plane (sigma2, gamma1)
    A1 = [_hat_weights((P1s * math.cos(a) - P1g * math.sin(a)).ravel(), ax1) for a in expected]
    A2T = [_hat_weights((P2s * math.cos(b) + P2g * math.sin(b)).ravel(), ax2).T for b in expected]
    out = np.zeros((P1s.size, P2s.size))
    for k1 in range(n):
        G = np.zeros((ax1.size, P2s.size))
        for k2 in range(n):
            Q = H2 @ lookup[(k1, k2)].values @ H1.T
            G += Q.T @ A2T[k2]
        out += A1[k1] @ G
    dth = math.pi / n
    out *= dth * dth / math.pi
    vals = out.reshape(s1.size, g2.size, s2.size, g1.size).transpose(0, 2, 3, 1)
    return WignerGrid4D(rp.output_axes, vals)


def l2_error(rec: WignerGrid4D, ref) -> float:
    ref = np.asarray(ref)
    return float(np.linalg.norm(rec.values - ref) / np.linalg.norm(ref))


# -- files -------------------------------------------------------------------

TOMOGRAM_CSV_HEADER = "eta1,eta2,value"


def save_tomogram(tomo: TomogramGrid, path, fmt: str = "csv") -> Path:
    """<path>.json metadata plus <path>.csv (eta1,eta2,value) or, opt-in,
    <path>.bin holding the values as little-endian float64 in grid order."""
    if fmt not in ("csv", "bin"):
        raise ConfigError(f"unknown tomogram format {fmt!r}")
    base = Path(path).with_suffix("")
    data_path = base.with_suffix("." + fmt)
    meta = {**tomo.proj.to_dict(), "grid": tomo.grid.to_dict(), "format": fmt, "values": data_path.name}
    if fmt == "csv":
        X = tomo.grid.points()
        rows = np.column_stack([X.real.ravel(), X.imag.ravel(), tomo.values.ravel()])
        np.savetxt(data_path, rows, delimiter=",", header=TOMOGRAM_CSV_HEADER, comments="", fmt="%.17g")
    else:
        tomo.values.astype("<f8").tofile(data_path)
    base.with_suffix(".json").write_text(json.dumps(meta, indent=2))
    return base.with_suffix(".json")


def load_tomogram(path) -> TomogramGrid:
    meta_path = Path(path).with_suffix(".json")
    try:
        meta = json.loads(meta_path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{meta_path}: tomogram metadata not found") from None
    grid = GridSpec2D.from_dict(meta["grid"])
    fmt = meta.get("format", "csv")
    data_path = meta_path.parent / meta.get("values", meta_path.with_suffix("." + fmt).name)
    if not data_path.exists():
        raise ConfigError(f"{data_path}: tomogram values not found")
    if fmt == "bin":
        values = np.fromfile(data_path, dtype="<f8")
        if values.size != grid.n * grid.n:
            raise ConfigError(f"{data_path}: {values.size} values do not match a {grid.n}x{grid.n} grid")
    else:
        with open(data_path) as fh:
            header = fh.readline().strip()
        if header != TOMOGRAM_CSV_HEADER:
            raise ConfigError(f"{data_path}: unexpected CSV header {header!r}")
        data = np.loadtxt(data_path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape != (grid.n * grid.n, 3):
            raise ConfigError(f"{data_path}: {data.shape[0]} rows do not match a {grid.n}x{grid.n} grid")
        values = data[:, 2]
    return TomogramGrid(ProjectionParams.from_dict(meta), grid, values.reshape(grid.n, grid.n))


def save_manifest(paths, rp: ReconstructionParams, path, state=None) -> Path:
    path = Path(path)
    entries = []
    for p in paths:
        p = Path(p)
        try:
            entries.append(str(p.resolve().relative_to(path.resolve().parent)))
        except ValueError:
            entries.append(str(p))
    doc = {"tomograms": entries, "params": rp.to_dict()}
    if state is not None:
        doc["state"] = state.to_dict()
    path.write_text(json.dumps(doc, indent=2))
    return path


def load_manifest(path):
    """Returns (tomogram paths, ReconstructionParams, state dict or None)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{path}: manifest not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: manifest is not valid JSON ({exc})") from None
    if "tomograms" not in doc or "params" not in doc:
        raise ConfigError(f"{path}: manifest needs 'tomograms' and 'params'")
    paths = [(path.parent / p) if not Path(p).is_absolute() else Path(p) for p in doc["tomograms"]]
    return paths, ReconstructionParams.from_dict(doc["params"]), doc.get("state")
