"""Closed-form two-dimensional Fresnel kernels and sampled field transforms.

Measure convention throughout: d^2 eta = d eta_1 d eta_2 over the real
and imaginary parts.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateTransformError
from .symplectic import RayMatrix, SymplecticParams

SINGULAR_TOL = 1e-9
LEAKAGE_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec2D:
    """Square uniform grid over one complex plane.

    Samples along each axis sit at ``center + (k - n/2) * h`` for
    k = 0 .. n-1 with h = 2 * half_extent / n, so the center itself is a
    sample and the layout matches FFT ordering after a shift.
    """

    center: complex
    half_extent: float
    samples_per_axis: int

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "half_extent", float(self.half_extent))
        n = self.samples_per_axis
        if int(n) != n or n < 8 or n % 2:
            raise ConfigError(f"samples_per_axis must be an even integer >= 8, got {n!r}")
        object.__setattr__(self, "samples_per_axis", int(n))
        if not np.isfinite(self.half_extent) or self.half_extent <= 0:
            raise ConfigError(f"half_extent must be finite and > 0, got {self.half_extent!r}")

    @property
    def n(self) -> int:
        return self.samples_per_axis

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.n

    def offsets(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.spacing

    def re_axis(self) -> np.ndarray:
        return self.center.real + self.offsets()

    def im_axis(self) -> np.ndarray:
        return self.center.imag + self.offsets()

    def points(self) -> np.ndarray:
        """Complex sample positions, rows = imaginary index, columns = real index."""
        return self.re_axis()[None, :] + 1j * self.im_axis()[:, None]

    def weights_1d(self) -> np.ndarray:
        w = np.full(self.n, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def weights(self) -> np.ndarray:
        w = self.weights_1d()
        return w[:, None] * w[None, :]

    def scaled(self, c: float) -> "GridSpec2D":
        return GridSpec2D(self.center * c, self.half_extent * abs(c), self.n)

    def to_dict(self) -> dict:
        return {
            "center": [self.center.real, self.center.imag],
            "half_extent": self.half_extent,
            "samples_per_axis": self.n,
        }

    @classmethod
    def from_dict(cls, d) -> "GridSpec2D":
        c = d.get("center", [0.0, 0.0])
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        return cls(c, d["half_extent"], d["samples_per_axis"])


@dataclass(frozen=True)
class ComplexField2D:
    grid: GridSpec2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n, self.grid.n):
            raise ConfigError(f"field values have shape {v.shape}, grid expects {(self.grid.n, self.grid.n)}")
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, grid: GridSpec2D, func) -> "ComplexField2D":
        return cls(grid, func(grid.points()))

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2 * self.grid.weights()))

    def boundary_fraction(self) -> float:
        v = np.abs(self.values)
        edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
        peak = v.max()
        return float(edge / peak) if peak > 0 else 0.0

    def __add__(self, other):
        return ComplexField2D(self.grid, self.values + other.values)

    def __mul__(self, c):
        return ComplexField2D(self.grid, c * self.values)

    __rmul__ = __mul__


def _require_b(m: RayMatrix):
    if abs(m.B) <= SINGULAR_TOL:
        raise DegenerateTransformError(
            f"|B| = {abs(m.B):.2e}: the kernel degenerates to a scaled delta; "
            "use the operator or state path instead"
        )


def kernel_eta(m: RayMatrix, eta_out, eta_in):
    """K^M(eta', eta) = exp[(i/2B)(A|eta|^2 - (eta eta'* + eta* eta') + D|eta'|^2)] / (2 i B pi)."""
    _require_b(m)
    eo = np.asarray(eta_out, complex)
    ei = np.asarray(eta_in, complex)
    quad = m.A * np.abs(ei) ** 2 - 2 * np.real(ei * eo.conj()) + m.D * np.abs(eo) ** 2
    return np.exp(1j * quad / (2 * m.B)) / (2j * m.B * np.pi)


def kernel_eta_sr(p: SymplecticParams, eta_out, eta_in):
    """The same kernel written directly in (s, r)."""
    s, r = p.s, p.r
    den = r.conjugate() + s.conjugate() - r - s
    if abs(den) <= 2 * SINGULAR_TOL:
        raise DegenerateTransformError(f"r* + s* - r - s = {den}: kernel is singular (B = 0)")
    eo = np.asarray(eta_out, complex)
    ei = np.asarray(eta_in, complex)
    a_in = np.abs(ei) ** 2
    a_out = np.abs(eo) ** 2
    expo = ((r.conjugate() - s) * a_in - (r + s) * a_out + ei * eo.conj() + ei.conj() * eo) / den
    return np.exp(expo - 0.5 * (a_in + a_out)) / (den * np.pi)


def kernel_xi(m: RayMatrix, xi_out, xi_in):
    """Frequency-domain kernel, i.e. the eta kernel of N = [D, -C; -B, A]."""
    if abs(m.C) <= SINGULAR_TOL:
        raise DegenerateTransformError(f"|C| = {abs(m.C):.2e}: frequency-domain kernel is singular")
    xo = np.asarray(xi_out, complex)
    xi = np.asarray(xi_in, complex)
    quad = m.D * np.abs(xi) ** 2 + m.A * np.abs(xo) ** 2 - 2 * np.real(xo.conj() * xi)
    return np.exp(1j * quad / (2 * -m.C)) / (2j * -m.C * np.pi)


def conjugate_matrix(m: RayMatrix) -> RayMatrix:
    """N = [D, -C; -B, A], the parameters of the frequency-domain kernel."""
    return RayMatrix(m.D, -m.C, -m.B, m.A)


def _axis_kernel(m: RayMatrix, x_out, x_in):
    return np.exp(1j * (m.A * x_in[None, :] ** 2 - 2 * x_out[:, None] * x_in[None, :] + m.D * x_out[:, None] ** 2) / (2 * m.B))


def _resolved(m: RayMatrix, g: GridSpec2D, out_grid: GridSpec2D) -> bool:
    # largest kernel phase step between neighbouring input samples
    xin = np.concatenate([g.re_axis(), g.im_axis()])
    xout = np.concatenate([out_grid.re_axis(), out_grid.im_axis()])
    reach = abs(m.A) * np.abs(xin).max() + np.abs(xout).max()
    return reach * g.spacing / abs(m.B) < np.pi


def _spectral_axis(m: RayMatrix, x_in: np.ndarray, h: float, x_out: np.ndarray) -> np.ndarray:
    """Per-axis operator for M = lens(C/A) scale(A) free(B/A), band-limited input."""
    n = x_in.size
    c = x_in[n // 2]
    k = 2 * np.pi * np.fft.fftfreq(n, h)
    fwd = np.exp(-1j * np.outer(k, x_in - c))
    prop = np.exp(-0.5j * (m.B / m.A) * k ** 2)
    y = x_out / m.A
    back = np.exp(1j * np.outer(y - c, k)) / n
    back[np.abs(y - c) > h * n / 2] = 0.0
    op = back @ (prop[:, None] * fwd)
    chirp = np.exp(0.5j * (m.C / m.A) * x_out ** 2)
    return chirp[:, None] * op / np.sqrt(abs(m.A))


def _use_spectral(m, g, out_grid, method):
    if method not in ("auto", "quadrature", "spectral"):
        raise ConfigError(f"method must be auto, quadrature or spectral, got {method!r}")
    if method == "spectral" and abs(m.A) <= 1e-3:
        raise DegenerateTransformError(f"|A| = {abs(m.A):.2e}: spectral path needs A away from zero")
    if method == "auto":
        return not _resolved(m, g, out_grid) and abs(m.A) > 1e-3
    return method == "spectral"


def fresnel_transform_field(m: RayMatrix, field: ComplexField2D, out_grid: GridSpec2D, check_leakage: bool = True,
                            method: str = "auto") -> ComplexField2D:
    """Trapezoid quadrature of Psi(eta') = int K^M(eta', eta) Phi(eta) d^2 eta.

    The kernel factorises over the real and imaginary parts, so the double
    sum is evaluated as two matrix products; the result is the same sum as
    the direct O(n^4) evaluation. When the kernel chirp is finer than the
    input grid (small |B|) the sum cannot resolve it, and the transform is
    applied spectrally through M = lens(C/A) scale(A) free(B/A) instead.
    method forces one route: "quadrature" or "spectral".
    """
    _require_b(m)
    if check_leakage:
        frac = field.boundary_fraction()
        if frac > LEAKAGE_TOL:
            warnings.warn(
                f"input field is {frac:.1e} of its peak at the grid boundary; "
                "values outside the grid are treated as zero",
                RuntimeWarning, stacklevel=2,
            )
    g = field.grid
    if _use_spectral(m, g, out_grid, method):
        kx = _spectral_axis(m, g.re_axis(), g.spacing, out_grid.re_axis())
        ky = _spectral_axis(m, g.im_axis(), g.spacing, out_grid.im_axis())
        sign = 1.0 if m.A > 0 else -1.0
        return ComplexField2D(out_grid, sign * (ky @ field.values @ kx.T))
    w = g.weights_1d()
    kx = _axis_kernel(m, out_grid.re_axis(), g.re_axis()) * w[None, :]
    ky = _axis_kernel(m, out_grid.im_axis(), g.im_axis()) * w[None, :]
    out = ky @ field.values @ kx.T / (2j * m.B * np.pi)
    return ComplexField2D(out_grid, out)


def adjoint_transform_field(m: RayMatrix, field: ComplexField2D, out_grid: GridSpec2D,
                            method: str = "auto") -> ComplexField2D:
    """(T+ h)(eta) = int conj(K(eta', eta)) h(eta') d^2 eta'."""
    _require_b(m)
    g = field.grid
    inv = RayMatrix(m.D, -m.B, -m.C, m.A)
    if _use_spectral(inv, g, out_grid, method):
        return fresnel_transform_field(inv, field, out_grid, check_leakage=False, method="spectral")
    w = g.weights_1d()
    kx = _axis_kernel(m, g.re_axis(), out_grid.re_axis()).conj().T * w[None, :]
    ky = _axis_kernel(m, g.im_axis(), out_grid.im_axis()).conj().T * w[None, :]
    out = ky @ field.values @ kx.T / np.conj(2j * m.B * np.pi)
    return ComplexField2D(out_grid, out)


def inner_product(f: ComplexField2D, g: ComplexField2D) -> complex:
    """int conj(f) g d^2 eta on a shared grid."""
    if f.grid != g.grid:
        raise ConfigError("fields live on different grids")
    return complex(np.sum(f.values.conj() * g.values * f.grid.weights()))


# -- CSV + JSON sidecar ------------------------------------------------------

FIELD_CSV_HEADER = "re_axis,im_axis,re_value,im_value"


def save_field(field: ComplexField2D, csv_path) -> None:
    csv_path = Path(csv_path)
    g = field.grid
    X, Y = np.meshgrid(g.re_axis(), g.im_axis())
    rows = np.column_stack([X.ravel(), Y.ravel(), field.values.real.ravel(), field.values.imag.ravel()])
    np.savetxt(csv_path, rows, delimiter=",", header=FIELD_CSV_HEADER, comments="", fmt="%.17g")
    csv_path.with_suffix(".json").write_text(json.dumps({"grid": g.to_dict(), "layout": "rows=im_axis, cols=re_axis"}, indent=2))


def load_field(csv_path) -> ComplexField2D:
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    grid = GridSpec2D.from_dict(meta["grid"])
    with open(csv_path) as fh:
        header = fh.readline().strip()
    if header != FIELD_CSV_HEADER:
        raise ConfigError(f"{csv_path}: unexpected CSV header {header!r}")
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.n * grid.n, 4):
        raise ConfigError(f"{csv_path}: {data.shape[0]} rows do not match a {grid.n}x{grid.n} grid")
    return ComplexField2D(grid, (data[:, 2] + 1j * data[:, 3]).reshape(grid.n, grid.n))
