"""Two-mode Wigner function in the entangled (sigma, gamma) form.

W(sigma, gamma) = pi^-3 int d^2eta <psi|sigma - eta><sigma + eta|psi> exp(eta gamma* - eta* gamma)

Gaussian benchmark states use closed forms that factor over the planes
(sigma1, gamma2) and (sigma2, gamma1); everything else goes through a
trapezoid quadrature over eta (or over xi for the conjugate form).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .fockspace import FockState, TruncationSpec, eta_ket_params, gaussian_ket_amplitudes, xi_ket_params
from .states import StateSpec

IMAG_TOL = 1e-10
CONVERGENCE_TOL = 1e-4
QUAD_POINTS = 96
CHECK_POINTS = 64
MAX_GRID_SAMPLES = 2 ** 24
_CHUNK = 64


@dataclass(frozen=True)
class PhasePoint:
    sigma: complex
    gamma: complex

    def __post_init__(self):
        s, g = complex(self.sigma), complex(self.gamma)
        if not (np.isfinite(s) and np.isfinite(g)):
            raise ConfigError("phase-space point must be finite")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "gamma", g)

    @property
    def alpha(self) -> complex:
        return (self.sigma + self.gamma) / 2

    @property
    def beta(self) -> complex:
        return (self.gamma.conjugate() - self.sigma.conjugate()) / 2


@dataclass(frozen=True)
class UniformAxis:
    """Inclusive uniform grid start..stop with n samples."""

    start: float
    stop: float
    n: int

    def __post_init__(self):
        if self.n < 1 or (self.n > 1 and not self.stop > self.start):
            raise ConfigError(f"invalid axis {self.start}..{self.stop} with {self.n} samples")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n)

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.n - 1) if self.n > 1 else 0.0

    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.spacing)
        if self.n > 1:
            w[0] = w[-1] = self.spacing / 2
        return w

    def to_dict(self):
        return {"start": self.start, "stop": self.stop, "n": self.n}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["start"]), float(d["stop"]), int(d["n"]))

    @classmethod
    def symmetric(cls, half: float, n: int) -> "UniformAxis":
        return cls(-half, half, n)


AXIS_NAMES = ("sigma1", "sigma2", "gamma1", "gamma2")


@dataclass
class WignerGrid4D:
    """values[i, j, k, l] = W(sigma1_i + i sigma2_j, gamma1_k + i gamma2_l)."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        self.axes = tuple(self.axes)
        if len(self.axes) != 4:
            raise ConfigError("WignerGrid4D needs four axes")
        v = np.asarray(self.values)
        if np.iscomplexobj(v):
            v = _real_checked(v)
        self.values = np.asarray(v, float)
        if self.values.shape != tuple(a.n for a in self.axes):
            raise ConfigError(f"values shape {self.values.shape} does not match axes")

    def integral(self) -> float:
        w = [a.weights() for a in self.axes]
        return float(np.einsum("ijkl,i,j,k,l->", self.values, *w))

    def meshgrid(self):
        return np.meshgrid(*(a.points for a in self.axes), indexing="ij")


def _real_checked(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        resid = float(np.max(np.abs(v.imag))) if v.size else 0.0
        if resid >= IMAG_TOL:
            raise NumericalError(f"Wigner value has imaginary residue {resid:.2e} >= {IMAG_TOL:g}")
        return v.real
    return v


# -- closed forms ------------------------------------------------------------

def analytic_wigner(state: StateSpec, sigma, gamma):
    """Closed form for Gaussian states, vectorised over sigma, gamma."""
    f1, f2 = state.plane_factors()
    sigma = np.asarray(sigma, complex)
    gamma = np.asarray(gamma, complex)
    return f1(sigma.real, gamma.imag) * f2(sigma.imag, gamma.real)


def vacuum_wigner(sigma, gamma):
    return np.exp(-np.abs(sigma) ** 2 - np.abs(gamma) ** 2) / np.pi ** 2


def single_mode_coherent_wigner(alpha, z):
    """Standard single-mode coherent Wigner function (1/pi) exp(-2|alpha - z|^2)."""
    return np.exp(-2 * np.abs(np.asarray(alpha) - z) ** 2) / np.pi


def to_single_mode(sigma, gamma):
    """(alpha, beta) with sigma = alpha - beta*, gamma = alpha + beta*."""
    sigma = np.asarray(sigma, complex)
    gamma = np.asarray(gamma, complex)
    return (sigma + gamma) / 2, (gamma.conj() - sigma.conj()) / 2


# -- quadrature --------------------------------------------------------------

@dataclass(frozen=True)
class _Trimmed:
    amps: np.ndarray
    window: float


def _trim(psi: FockState) -> _Trimmed:
    a = psi.amplitudes
    mag = np.abs(a)
    keep = mag > 1e-15 * mag.max()
    n1 = int(np.max(np.nonzero(keep.any(axis=1)))) + 1
    n2 = int(np.max(np.nonzero(keep.any(axis=0)))) + 1
    n = max(n1, n2)
    nbar = float(np.sum(mag ** 2 * (np.arange(a.shape[0])[:, None] + np.arange(a.shape[1])[None, :])))
    window = 6.0 + 2.0 * np.sqrt(nbar / float(np.sum(mag ** 2)) + 1.0)
    return _Trimmed(a[:n, :n], window)


def wavefunction(psi: FockState, labels, representation: str = "eta") -> np.ndarray:
    """<eta|psi> (or <xi|psi>) at an array of complex labels."""
    return _wavefunction(_trim(psi).amps, labels, representation)


def _wavefunction(amps, labels, representation):
    labels = np.asarray(labels, complex)
    params = eta_ket_params(labels) if representation == "eta" else xi_ket_params(labels)
    kets = gaussian_ket_amplitudes(*params, amps.shape[0])
    return np.tensordot(amps, kets.conj(), axes=([0, 1], [0, 1]))


def _node_counts(window, dual_max):
    """(fine, coarse) node counts: at least 96 / 64, more when the plane-wave
    factor exp(2i eta.gamma) would alias at that spacing."""
    h = 2 * np.pi / (2 * dual_max + 16.0)
    fine = max(QUAD_POINTS, int(np.ceil(2 * window / h)) + 1)
    coarse = max(CHECK_POINTS, int(np.ceil(fine * 2 / 3)))
    return fine, coarse


def _quad_nodes(window, n):
    x = np.linspace(-window, window, n)
    h = x[1] - x[0]
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return x, w


def _integrate_points(tr: _Trimmed, centers, duals, representation, n):
    """Vectorised quadrature over a flat list of (center, dual) points.

    eta form: center = sigma, dual = gamma, labels sigma -/+ eta, phase exp(2i(e2 g1 - e1 g2)).
    xi form:  center = gamma, dual = sigma, labels gamma +/- xi,  phase exp(2i(x1 s2 - x2 s1)).
    """
    x, w = _quad_nodes(tr.window, n)
    E = x[None, :] + 1j * x[:, None]          # rows = imaginary part
    W2 = w[:, None] * w[None, :]
    out = np.empty(len(centers), complex)
    for lo in range(0, len(centers), _CHUNK):
        c = centers[lo:lo + _CHUNK, None, None]
        d = duals[lo:lo + _CHUNK, None, None]
        if representation == "eta":
            bra = _wavefunction(tr.amps, c - E, "eta")
            ket = _wavefunction(tr.amps, c + E, "eta")
            phase = np.exp(2j * (E.imag * d.real - E.real * d.imag))
        else:
            bra = _wavefunction(tr.amps, c + E, "xi")
            ket = _wavefunction(tr.amps, c - E, "xi")
            phase = np.exp(2j * (E.real * d.imag - E.imag * d.real))
        out[lo:lo + _CHUNK] = np.sum(bra.conj() * ket * phase * W2, axis=(-2, -1))
    return out / np.pi ** 3


def quadrature_wigner(psi: FockState, sigma, gamma, representation: str = "eta", check: bool = True) -> np.ndarray:
    """Quadrature route at arbitrary points; refines 64 -> 96 nodes per axis and
    raises NumericalError if the two disagree by more than 1e-4."""
    sigma, gamma = np.broadcast_arrays(np.asarray(sigma, complex), np.asarray(gamma, complex))
    shape = sigma.shape
    s, g = sigma.ravel(), gamma.ravel()
    centers, duals = (s, g) if representation == "eta" else (g, s)
    tr = _trim(psi)
    n_fine, n_coarse = _node_counts(tr.window, float(np.max(np.abs(duals), initial=0.0)))
    fine = _integrate_points(tr, centers, duals, representation, n_fine)
    if check:
        coarse = _integrate_points(tr, centers, duals, representation, n_coarse)
        diff = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
        if diff > CONVERGENCE_TOL:
            raise NumericalError(
                f"Wigner quadrature did not converge: {n_coarse}^2 vs {n_fine}^2 nodes differ by {diff:.2e} > {CONVERGENCE_TOL:g}"
            )
    return _real_checked(fine).reshape(shape)


def _resolve(state, t):
    if isinstance(state, FockState):
        return None, state
    if t is None:
        t = TruncationSpec(24)
    return state, state.fock(t)


def wigner_value(state, pt: PhasePoint, t: TruncationSpec | None = None, method: str = "auto") -> float:
    """W at one phase-space point.  method: auto | analytic | quadrature."""
    spec, psi = (state, None) if method != "quadrature" and getattr(state, "gaussian", False) else _resolve(state, t)
    if method == "analytic" and (spec is None or not spec.gaussian):
        raise ConfigError("no closed-form Wigner function for this state")
    if psi is None:
        return float(analytic_wigner(spec, pt.sigma, pt.gamma))
    return float(quadrature_wigner(psi, pt.sigma, pt.gamma, "eta"))


def wigner_values(state, sigma, gamma, t: TruncationSpec | None = None, method: str = "auto") -> np.ndarray:
    """Vectorised wigner_value."""
    if method != "quadrature" and getattr(state, "gaussian", False):
        return analytic_wigner(state, sigma, gamma)
    _, psi = _resolve(state, t)
    return quadrature_wigner(psi, sigma, gamma, "eta")


def wigner_xi_form_check(state, pt: PhasePoint, t: TruncationSpec | None = None) -> float:
    """W from the conjugate-representation integral; always by quadrature."""
    _, psi = _resolve(state, t)
    return float(quadrature_wigner(psi, pt.sigma, pt.gamma, "xi"))


def tensor_quadrature(psi: FockState, s1, s2, g1, g2) -> np.ndarray:
    """W on the tensor product of four 1D node sets, shape (s1, s2, g1, g2).

    For fixed sigma the gamma dependence is a separable Fourier sum
    P2 G P1^T over the eta nodes, so each sigma costs two wavefunction
    evaluations regardless of the number of gamma nodes."""
    tr = _trim(psi)
    s1, s2, g1, g2 = (np.atleast_1d(np.asarray(a, float)) for a in (s1, s2, g1, g2))
    results = []
    gmax = float(np.hypot(np.max(np.abs(g1)), np.max(np.abs(g2))))
    for n in _node_counts(tr.window, gmax):
        x, w = _quad_nodes(tr.window, n)
        E = x[None, :] + 1j * x[:, None]
        W2 = w[:, None] * w[None, :]
        P2 = np.exp(2j * np.outer(g1, x))      # gamma1 x eta2
        P1 = np.exp(-2j * np.outer(g2, x))     # gamma2 x eta1
        vals = np.empty((s1.size, s2.size, g1.size, g2.size), complex)
        for i, a in enumerate(s1):
            for j, b in enumerate(s2):
                sig = complex(a, b)
                G = _wavefunction(tr.amps, sig - E, "eta").conj() * _wavefunction(tr.amps, sig + E, "eta") * W2
                vals[i, j] = P2 @ G @ P1.T
        results.append(vals / np.pi ** 3)
    diff = float(np.max(np.abs(results[0] - results[1])))
    if diff > CONVERGENCE_TOL:
        raise NumericalError(f"Wigner grid quadrature did not converge: refinement difference {diff:.2e}")
    return _real_checked(results[0])


def wigner_grid(state, axes, t: TruncationSpec | None = None, method: str = "auto") -> WignerGrid4D:
    axes = tuple(axes)
    total = int(np.prod([a.n for a in axes]))
    if total > MAX_GRID_SAMPLES:
        raise ConfigError(f"Wigner grid with {total} samples exceeds the limit of 2^24 = {MAX_GRID_SAMPLES}")
    if method != "quadrature" and getattr(state, "gaussian", False):
        f1, f2 = state.plane_factors()
        s1, s2, g1, g2 = (a.points for a in axes)
        p1 = f1(s1[:, None], g2[None, :])      # (sigma1, gamma2)
        p2 = f2(s2[:, None], g1[None, :])      # (sigma2, gamma1)
        return WignerGrid4D(axes, np.einsum("il,jk->ijkl", p1, p2))
    _, psi = _resolve(state, t)
    return WignerGrid4D(axes, tensor_quadrature(psi, *(a.points for a in axes)))


# -- export ------------------------------------------------------------------
# On disk the samples are written plane-paired: (sigma1, gamma2, sigma2, gamma1),
# sigma1 slowest and gamma1 fastest.

FILE_ORDER = ("sigma1", "gamma2", "sigma2", "gamma1")
_TO_FILE = (0, 3, 1, 2)


def save_wigner_grid(grid: WignerGrid4D, path, fmt: str = "csv") -> Path:
    """Writes <path>.json metadata plus <path>.csv or <path>.bin (little-endian float64)."""
    path = Path(path)
    base = path.with_suffix("")
    if fmt not in ("csv", "bin"):
        raise ConfigError(f"unknown Wigner export format {fmt!r}")
    flat = np.ascontiguousarray(np.transpose(grid.values, _TO_FILE)).ravel()
    data_path = base.with_suffix("." + fmt)
    if fmt == "bin":
        flat.astype("<f8").tofile(data_path)
    else:
        np.savetxt(data_path, flat, fmt="%.17g", header="value", comments="")
    meta = {
        "axes": {name: ax.to_dict() for name, ax in zip(AXIS_NAMES, grid.axes)},
        "order": list(FILE_ORDER),
        "format": fmt,
        "data": data_path.name,
    }
    base.with_suffix(".json").write_text(json.dumps(meta, indent=2))
    return base.with_suffix(".json")


def load_wigner_grid(meta_path) -> WignerGrid4D:
    meta_path = Path(meta_path).with_suffix(".json")
    meta = json.loads(meta_path.read_text())
    if tuple(meta.get("order", ())) != FILE_ORDER:
        raise ConfigError(f"{meta_path}: unsupported axis order {meta.get('order')}")
    axes = tuple(UniformAxis.from_dict(meta["axes"][n]) for n in AXIS_NAMES)
    data_path = meta_path.parent / meta["data"]
    if meta["format"] == "bin":
        flat = np.fromfile(data_path, dtype="<f8")
    else:
        flat = np.loadtxt(data_path, skiprows=1, ndmin=1)
    file_shape = tuple(axes[i].n for i in _TO_FILE)
    if flat.size != int(np.prod(file_shape)):
        raise ConfigError(f"{data_path}: {flat.size} values do not match axes {file_shape}")
    return WignerGrid4D(axes, np.transpose(flat.reshape(file_shape), np.argsort(_TO_FILE)))
