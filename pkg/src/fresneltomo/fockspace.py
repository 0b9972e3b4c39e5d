"""Truncated two-mode Fock space.

States are N x N amplitude tensors indexed (n1, n2); operators are
N^2 x N^2 matrices with flat index n1 * N + n2.  Everything is dense:
at N <= 32 the largest operator is 1024 x 1024.

The two-mode Fresnel operator is assembled from its normal-ordered
factorisation

    F2 = exp((r/s*) a1+ a2+) (1/s*)^(n1 + n2 + 1) exp(-(r*/s*) a1 a2).

Both exponentials are nilpotent on the truncated space, so their power
series terminate.  Matrix elements <m|F2|n> with m, n < N are therefore
exact; truncation error only enters through sums over intermediate
states (products, overlaps with non-normalisable states).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateTransformError, NumericalError
from .symplectic import RayMatrix, SymplecticParams, compose, sr_to_ray

MAX_SQUEEZE = 0.95
SERIES_TOL = 1e-16


@dataclass(frozen=True)
class TruncationSpec:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"Fock cutoff N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def dim(self) -> int:
        return self.N * self.N

    def photon_numbers(self) -> np.ndarray:
        """Total photon number n1 + n2 for every basis state, flat order."""
        n = np.arange(self.N)
        return (n[:, None] + n[None, :]).ravel()

    def sector(self, k: int) -> np.ndarray:
        """Flat indices of basis states with n1 + n2 <= k."""
        return np.flatnonzero(self.photon_numbers() <= k)

    def box(self, k: int) -> np.ndarray:
        """Flat indices of basis states with n1, n2 <= k."""
        n = np.arange(self.N)
        return np.flatnonzero(((n[:, None] <= k) & (n[None, :] <= k)).ravel())


@dataclass(frozen=True)
class FockState:
    amplitudes: np.ndarray
    truncation: TruncationSpec = field(default=None)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 2 or amps.shape[0] != amps.shape[1]:
            raise ConfigError(f"amplitude tensor must be square N x N, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise NumericalError("non-finite amplitudes in Fock state")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.truncation is None:
            object.__setattr__(self, "truncation", TruncationSpec(amps.shape[0]))
        elif self.truncation.N != amps.shape[0]:
            raise ConfigError("amplitude tensor shape does not match truncation")

    @property
    def N(self) -> int:
        return self.truncation.N

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.ravel()

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "FockState") -> complex:
        """<self|other> over the common truncation."""
        n = min(self.N, other.N)
        return complex(np.vdot(self.amplitudes[:n, :n], other.amplitudes[:n, :n]))

    def truncate(self, N: int) -> "FockState":
        if N > self.N:
            return self.pad(N)
        return FockState(self.amplitudes[:N, :N].copy())

    def pad(self, N: int) -> "FockState":
        out = np.zeros((N, N), dtype=complex)
        out[: self.N, : self.N] = self.amplitudes
        return FockState(out)

    def to_json(self) -> str:
        flat = self.amplitudes.ravel()
        return json.dumps({"N": self.N, "amplitudes": [[z.real, z.imag] for z in flat]})

    @classmethod
    def from_json(cls, text: str) -> "FockState":
        data = json.loads(text)
        N = int(data["N"])
        pairs = np.asarray(data["amplitudes"], dtype=float)
        if pairs.shape != (N * N, 2):
            raise ConfigError(f"expected {N * N} [re, im] pairs for N={N}, got shape {pairs.shape}")
        return cls((pairs[:, 0] + 1j * pairs[:, 1]).reshape(N, N))


@dataclass(frozen=True)
class TwoModeOperator:
    matrix: np.ndarray
    truncation: TruncationSpec

    __array_ufunc__ = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.truncation.dim, self.truncation.dim):
            raise ConfigError(f"operator shape {m.shape} does not match N={self.truncation.N}")
        if not np.all(np.isfinite(m)):
            raise NumericalError("non-finite entries in operator matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dag(self) -> "TwoModeOperator":
        return TwoModeOperator(self.matrix.conj().T, self.truncation)

    def __matmul__(self, other):
        if isinstance(other, TwoModeOperator):
            return TwoModeOperator(self.matrix @ other.matrix, self.truncation)
        if isinstance(other, FockState):
            N = self.truncation.N
            return FockState((self.matrix @ other.vector).reshape(N, N))
        return NotImplemented

    def __add__(self, other):
        return TwoModeOperator(self.matrix + other.matrix, self.truncation)

    def __sub__(self, other):
        return TwoModeOperator(self.matrix - other.matrix, self.truncation)

    def __mul__(self, c):
        return TwoModeOperator(c * self.matrix, self.truncation)

    __rmul__ = __mul__

    def element(self, bra: tuple, ket: tuple) -> complex:
        N = self.truncation.N
        return complex(self.matrix[bra[0] * N + bra[1], ket[0] * N + ket[1]])

    def restricted(self, indices) -> np.ndarray:
        return self.matrix[np.ix_(indices, indices)]


# -- ladder-operator actions on tensors -------------------------------------
# Arrays passed here carry the (n1, n2) Fock indices on their first two axes;
# any trailing axes are carried along untouched.

def _weights(N, shape_tail):
    return np.sqrt(np.arange(N, dtype=float)).reshape((N,) + (1,) * shape_tail)


def _lower_pair(t: np.ndarray) -> np.ndarray:
    """a1 a2 applied to the leading Fock axes."""
    N = t.shape[0]
    tail = t.ndim - 2
    w = _weights(N, tail)
    out = np.zeros_like(t)
    out[:-1, :-1] = t[1:, 1:] * w[1:, None] * w[1:].reshape((1, N - 1) + (1,) * tail)
    return out


def _raise_pair(t: np.ndarray) -> np.ndarray:
    """a1+ a2+ applied to the leading Fock axes (top rows fall off)."""
    N = t.shape[0]
    tail = t.ndim - 2
    w = _weights(N, tail)
    out = np.zeros_like(t)
    out[1:, 1:] = t[:-1, :-1] * w[1:, None] * w[1:].reshape((1, N - 1) + (1,) * tail)
    return out


def _exp_series(apply, c: complex, t: np.ndarray) -> np.ndarray:
    """exp(c X) t for a nilpotent pair operator X given by ``apply``."""
    out = t.astype(complex, copy=True)
    term = out.copy()
    scale = max(np.abs(out).max(), 1e-300)
    for k in range(1, 4 * t.shape[0] + 2):
        term = apply(term) * (c / k)
        mag = np.abs(term).max()
        if mag == 0.0 or mag < SERIES_TOL * scale:
            return out
        out += term
    raise NumericalError("pair-operator exponential series did not terminate")


def _fresnel_apply(p: SymplecticParams, t: np.ndarray) -> np.ndarray:
    N = t.shape[0]
    sc = p.s.conjugate()
    t = _exp_series(_lower_pair, -p.r.conjugate() / sc, t)
    n = np.arange(N)
    diag = (1.0 / sc) ** (n[:, None] + n[None, :] + 1)
    t = t * diag.reshape(diag.shape + (1,) * (t.ndim - 2))
    return _exp_series(_raise_pair, p.r / sc, t)


def _check_squeeze(p: SymplecticParams):
    p.check(1e-10)
    if p.squeeze_ratio > MAX_SQUEEZE:
        raise ConfigError(
            f"|r/s| = {p.squeeze_ratio:.3f} exceeds {MAX_SQUEEZE}; truncated "
            "Fock-space results are not trustworthy at this squeezing"
        )


# -- operators ---------------------------------------------------------------

def ladder_operators(t: TruncationSpec) -> tuple[TwoModeOperator, TwoModeOperator]:
    a = np.diag(np.sqrt(np.arange(1, t.N, dtype=float)), 1)
    eye = np.eye(t.N)
    return TwoModeOperator(np.kron(a, eye), t), TwoModeOperator(np.kron(eye, a), t)


def quadrature_operators(t: TruncationSpec):
    """(Q1, Q2, P1, P2) with Q = (a + a+)/sqrt2, P = (a - a+)/(i sqrt2)."""
    a1, a2 = ladder_operators(t)
    r2 = np.sqrt(2.0)
    Q1 = (a1 + a1.dag) * (1 / r2)
    Q2 = (a2 + a2.dag) * (1 / r2)
    P1 = (a1 - a1.dag) * (1 / (1j * r2))
    P2 = (a2 - a2.dag) * (1 / (1j * r2))
    return Q1, Q2, P1, P2


def identity_operator(t: TruncationSpec) -> TwoModeOperator:
    return TwoModeOperator(np.eye(t.dim), t)


def build_fresnel_operator(p: SymplecticParams, t: TruncationSpec) -> TwoModeOperator:
    _check_squeeze(p)
    N = t.N
    sc = p.s.conjugate()
    eye = np.eye(t.dim, dtype=complex).reshape(N, N, t.dim)
    lower = _exp_series(_lower_pair, -p.r.conjugate() / sc, eye).reshape(t.dim, t.dim)
    upper = _exp_series(_raise_pair, p.r / sc, eye).reshape(t.dim, t.dim)
    middle = (1.0 / sc) ** (t.photon_numbers() + 1)
    F = (upper * middle[None, :]) @ lower
    if not np.all(np.isfinite(F)):
        raise NumericalError("non-finite entries while building the Fresnel operator")
    return TwoModeOperator(F, t)


def fresnel_transform_state(p: SymplecticParams, psi: FockState) -> FockState:
    """F2(p) |psi>, applied factor by factor on the amplitude tensor.

    Identical to ``build_fresnel_operator(p, t) @ psi`` at the same cutoff.
    """
    _check_squeeze(p)
    m = sr_to_ray(p, 1e-10)
    if abs(complex(m.D, m.B)) < 1e-6:
        warnings.warn(
            f"|D + iB| = {abs(complex(m.D, m.B)):.2e}: the closed-form eta representation "
            "is degenerate for this transform; the operator product is still returned",
            RuntimeWarning, stacklevel=2,
        )
    return FockState(_fresnel_apply(p, np.asarray(psi.amplitudes)))


# -- Gaussian kets -----------------------------------------------------------

def gaussian_ket_amplitudes(c, x, y, w, N: int) -> np.ndarray:
    """Amplitudes of c exp(x a1+ + y a2+ + w a1+ a2+)|00>.

    c, x, y may be arrays of a common shape S (w scalar or broadcastable);
    the result has shape (N, N) + S.  Uses the recurrence
    sqrt(n1+1) psi[n1+1, n2] = x psi[n1, n2] + w sqrt(n2) psi[n1, n2-1].
    """
    c, x, y = np.broadcast_arrays(np.asarray(c, complex), np.asarray(x, complex), np.asarray(y, complex))
    w = np.asarray(w, complex)
    psi = np.zeros((N, N) + c.shape, dtype=complex)
    psi[0, 0] = c
    sq = np.sqrt(np.arange(N, dtype=float)).reshape((N,) + (1,) * c.ndim)
    for n2 in range(N - 1):
        psi[0, n2 + 1] = y * psi[0, n2] / sq[n2 + 1]
    for n1 in range(N - 1):
        psi[n1 + 1] = x * psi[n1] / sq[n1 + 1]
        psi[n1 + 1, 1:] += w * sq[1:] * psi[n1, :-1] / sq[n1 + 1]
    return psi


def _warn_large(label, z, N):
    if abs(z) ** 2 > N / 4:
        warnings.warn(
            f"|{label}|^2 = {abs(z) ** 2:.2f} > N/4 = {N / 4:.2f}: the e^(|{label}|^2/2) "
            "growth of the series amplifies truncation error",
            RuntimeWarning, stacklevel=3,
        )


def eta_ket_params(eta):
    eta = np.asarray(eta, complex)
    return np.exp(-0.5 * np.abs(eta) ** 2), eta, -eta.conj(), 1.0


def xi_ket_params(xi):
    xi = np.asarray(xi, complex)
    return np.exp(-0.5 * np.abs(xi) ** 2), xi, xi.conj(), -1.0


def eta_sr_ket_params(m: RayMatrix, eta):
    """|eta>_{s,r} = F2|eta> in closed form; needs D + iB != 0."""
    den = complex(m.D, m.B)
    if abs(den) < 1e-6:
        raise DegenerateTransformError(f"|D + iB| = {abs(den):.2e} < 1e-6: eta-representation tomogram is degenerate")
    eta = np.asarray(eta, complex)
    c = np.exp(-complex(m.A, -m.C) * np.abs(eta) ** 2 / (2 * den)) / den
    return c, eta / den, -eta.conj() / den, complex(m.D, -m.B) / den


def xi_sr_ket_params(m: RayMatrix, xi):
    """|xi>_{s,r} = F2|xi> in closed form; needs A - iC != 0."""
    den = complex(m.A, -m.C)
    if abs(den) < 1e-6:
        raise DegenerateTransformError(f"|A - iC| = {abs(den):.2e} < 1e-6: xi-representation tomogram is degenerate")
    xi = np.asarray(xi, complex)
    c = np.exp(-complex(m.D, m.B) * np.abs(xi) ** 2 / (2 * den)) / den
    return c, xi / den, xi.conj() / den, -complex(m.A, m.C) / den


def build_eta_state(eta: complex, t: TruncationSpec) -> FockState:
    """Truncated amplitudes of the entangled state |eta> (not normalisable)."""
    _warn_large("eta", eta, t.N)
    return FockState(gaussian_ket_amplitudes(*eta_ket_params(eta), t.N))


def build_xi_state(xi: complex, t: TruncationSpec) -> FockState:
    _warn_large("xi", xi, t.N)
    return FockState(gaussian_ket_amplitudes(*xi_ket_params(xi), t.N))


def build_eta_sr_state(m: RayMatrix, eta: complex, t: TruncationSpec) -> FockState:
    return FockState(gaussian_ket_amplitudes(*eta_sr_ket_params(m, eta), t.N))


def build_xi_sr_state(m: RayMatrix, xi: complex, t: TruncationSpec) -> FockState:
    return FockState(gaussian_ket_amplitudes(*xi_sr_ket_params(m, xi), t.N))


def coherent_amplitudes(z1: complex, z2: complex, N: int) -> np.ndarray:
    def single(z):
        out = np.empty(N, complex)
        out[0] = np.exp(-0.5 * abs(z) ** 2)
        for n in range(1, N):
            out[n] = out[n - 1] * z / np.sqrt(n)
        return out
    return np.outer(single(z1), single(z2))


def coherent_state(z1: complex, z2: complex, t: TruncationSpec) -> FockState:
    return FockState(coherent_amplitudes(z1, z2, t.N))


def vacuum_state(t: TruncationSpec) -> FockState:
    amps = np.zeros((t.N, t.N), complex)
    amps[0, 0] = 1.0
    return FockState(amps)


# -- regularised overlaps of non-normalisable states -------------------------

def smooth_taper(N: int) -> np.ndarray:
    """C-infinity window in mean photon number (n1 + n2)/2, 1 at the
    vacuum and 0 at n = N - 1."""
    n = np.arange(N)
    u = np.clip((n[:, None] + n[None, :]) / (2.0 * (N - 1)), 0.0, 1.0)

    # steepness 2 balances the flat region against the transition width
    def bump(z):
        return np.where(z > 0, np.exp(-2.0 / np.maximum(z, 1e-300)), 0.0)

    return bump(1 - u) / (bump(1 - u) + bump(u))


def regularized_overlap(bra: FockState, ket: FockState) -> complex:
    """<bra|ket> for states whose amplitudes do not decay (|eta>, |xi>, ...).

    The plain truncated sum oscillates with the cutoff; weighting it with a
    smooth taper in photon number gives a summation that converges to the
    Abel-regularised value as N grows.
    """
    N = min(bra.N, ket.N)
    w = smooth_taper(N)
    return complex(np.sum(bra.amplitudes[:N, :N].conj() * ket.amplitudes[:N, :N] * w))


# -- residual diagnostics ----------------------------------------------------

def _sector_norm(X: np.ndarray, idx) -> float:
    return float(np.linalg.norm(X[np.ix_(idx, idx)], 2))


def _conjugation_targets(m: RayMatrix, t: TruncationSpec):
    Q1, Q2, P1, P2 = quadrature_operators(t)
    A, B, C, D = m.A, m.B, m.C, m.D
    h = 0.5
    return {
        "A1": (Q1, h * ((A + D) * Q1.matrix - (B - C) * P1.matrix + (A - D) * Q2.matrix + (B + C) * P2.matrix)),
        "A2": (Q2, h * ((A + D) * Q2.matrix - (B - C) * P2.matrix + (A - D) * Q1.matrix + (B + C) * P1.matrix)),
        "A3": (P1, h * ((A + D) * P1.matrix + (B - C) * Q1.matrix - (A - D) * P2.matrix + (B + C) * Q2.matrix)),
        "A4": (P2, h * ((A + D) * P2.matrix + (B - C) * Q2.matrix - (A - D) * P1.matrix + (B + C) * Q1.matrix)),
        "A5": (Q1 - Q2, D * (Q1 - Q2).matrix - B * (P1 - P2).matrix),
        "A6": (P1 + P2, B * (Q1 + Q2).matrix + D * (P1 + P2).matrix),
        "A7": (Q1 + Q2, A * (Q1 + Q2).matrix + C * (P1 + P2).matrix),
        "A8": (P1 - P2, A * (P1 - P2).matrix - C * (Q1 - Q2).matrix),
    }


def conjugation_residuals(p: SymplecticParams, t: TruncationSpec, k: int | None = None) -> dict:
    """Per-relation sector residuals of F2 X F2+ against its quadrature form,
    plus the two ladder relations F2 a F2^-1 (keys 'a1', 'a2')."""
    if k is None:
        k = t.N // 3
    if k > t.N // 3:
        raise ConfigError(f"sector cap k={k} exceeds N/3 = {t.N // 3}")
    idx = t.sector(k)
    F = build_fresnel_operator(p, t).matrix
    Fd = F.conj().T
    m = sr_to_ray(p, 1e-10)
    out = {}
    for name, (X, rhs) in _conjugation_targets(m, t).items():
        out[name] = _sector_norm(F @ X.matrix @ Fd - rhs, idx)
    Finv = build_fresnel_operator(p.inverse(), t).matrix
    a1, a2 = ladder_operators(t)
    sc = p.s.conjugate()
    out["a1"] = _sector_norm(F @ a1.matrix @ Finv - (sc * a1.matrix - p.r * a2.dag.matrix), idx)
    out["a2"] = _sector_norm(F @ a2.matrix @ Finv - (sc * a2.matrix - p.r * a1.dag.matrix), idx)
    return out


def conjugation_residual(p: SymplecticParams, t: TruncationSpec, k: int | None = None) -> float:
    return max(conjugation_residuals(p, t, k).values())


def unitarity_residual(p: SymplecticParams, t: TruncationSpec, k: int | None = None) -> float:
    k = t.N // 3 if k is None else k
    F = build_fresnel_operator(p, t).matrix
    return _sector_norm(F.conj().T @ F - np.eye(t.dim), t.sector(k))


def group_law_residual(p1: SymplecticParams, p2: SymplecticParams, t: TruncationSpec, k: int | None = None) -> float:
    k = t.N // 3 if k is None else k
    F1 = build_fresnel_operator(p1, t).matrix
    F2 = build_fresnel_operator(p2, t).matrix
    F12 = build_fresnel_operator(compose(p1, p2), t).matrix
    return _sector_norm(F1 @ F2 - F12, t.sector(k))


def coherent_matrix_element(p: SymplecticParams, z1p, z2p, z1, z2) -> complex:
    """Closed form <z1', z2'| F2 |z1, z2>."""
    s, r = p.s, p.r
    sc = s.conjugate()
    expo = (
        -0.5 * (abs(z1) ** 2 + abs(z2) ** 2 + abs(z1p) ** 2 + abs(z2p) ** 2)
        + (r / sc) * np.conj(z1p) * np.conj(z2p)
        - (r.conjugate() / sc) * z1 * z2
        + (np.conj(z1p) * z1 + np.conj(z2p) * z2) / sc
    )
    return complex(np.exp(expo) / sc)


def coherent_eta_overlap(z1, z2, eta) -> complex:
    """Closed form <z1, z2|eta>."""
    expo = (
        -0.5 * (abs(z1) ** 2 + abs(z2) ** 2 + abs(eta) ** 2)
        + eta * np.conj(z1) - np.conj(eta) * np.conj(z2) + np.conj(z1) * np.conj(z2)
    )
    return complex(np.exp(expo))


def eigen_residual(op: TwoModeOperator, psi: FockState, eigenvalue: complex, box: int | None = None) -> float:
    """||Pi (X - x) psi|| / ||Pi psi|| with Pi the box n1, n2 <= box
    (default N // 2).  The entangled states are not normalisable, so the
    comparison is made away from the cutoff edge."""
    t = psi.truncation
    idx = t.box(t.N // 2 if box is None else box)
    v = psi.vector
    res = (op.matrix @ v - eigenvalue * v)[idx]
    return float(np.linalg.norm(res) / np.linalg.norm(v[idx]))


def fresnel_quadratures(m: RayMatrix, t: TruncationSpec, representation: str = "eta"):
    """The commuting pair diagonalised by |eta>_{s,r} (or |xi>_{s,r})."""
    Q1, Q2, P1, P2 = quadrature_operators(t)
    if representation == "eta":
        return (m.D * (Q1 - Q2) - m.B * (P1 - P2), m.B * (Q1 + Q2) + m.D * (P1 + P2))
    if representation == "xi":
        return (m.A * (Q1 + Q2) + m.C * (P1 + P2), m.A * (P1 - P2) - m.C * (Q1 - Q2))
    raise ConfigError(f"unknown representation {representation!r}")

