"""Pure two-mode states used as tomography benchmarks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fockspace import FockState, TruncationSpec, coherent_amplitudes, gaussian_ket_amplitudes
from .symplectic import SymplecticParams, sr_to_ray

TMSV_MAX_SQUEEZE = 0.3


class StateSpec:
    """Base class.  Gaussian states expose ``plane_factors`` so that their
    Wigner function can be evaluated in closed form as f1(sigma1, gamma2)
    * f2(sigma2, gamma1)."""

    gaussian = False

    def fock(self, t: TruncationSpec) -> FockState:
        raise NotImplementedError

    def plane_factors(self):
        raise NotImplementedError(f"{type(self).__name__} has no closed-form Wigner function")

    def extent(self) -> float:
        """Rough phase-space radius beyond which the state is negligible."""
        return 0.0

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianPlane:
    """(1/pi) exp(-|M (x - c)|^2) on one coordinate plane."""

    M: tuple
    c: tuple = (0.0, 0.0)

    def __call__(self, x, y):
        M = np.asarray(self.M, float)
        dx = np.asarray(x, float) - self.c[0]
        dy = np.asarray(y, float) - self.c[1]
        u = M[0, 0] * dx + M[0, 1] * dy
        v = M[1, 0] * dx + M[1, 1] * dy
        return np.exp(-(u * u + v * v)) / np.pi


_IDENTITY = ((1.0, 0.0), (0.0, 1.0))


@dataclass(frozen=True)
class Vacuum(StateSpec):
    gaussian = True

    def fock(self, t):
        amps = np.zeros((t.N, t.N), complex)
        amps[0, 0] = 1.0
        return FockState(amps)

    def plane_factors(self):
        return GaussianPlane(_IDENTITY), GaussianPlane(_IDENTITY)

    def to_dict(self):
        return {"kind": "vacuum"}


@dataclass(frozen=True)
class Coherent(StateSpec):
    z1: complex
    z2: complex
    gaussian = True

    def __post_init__(self):
        object.__setattr__(self, "z1", complex(self.z1))
        object.__setattr__(self, "z2", complex(self.z2))

    @property
    def sigma0(self) -> complex:
        return self.z1 - self.z2.conjugate()

    @property
    def gamma0(self) -> complex:
        return self.z1 + self.z2.conjugate()

    def fock(self, t):
        return FockState(coherent_amplitudes(self.z1, self.z2, t.N))

    def plane_factors(self):
        s0, g0 = self.sigma0, self.gamma0
        return (GaussianPlane(_IDENTITY, (s0.real, g0.imag)),
                GaussianPlane(_IDENTITY, (s0.imag, g0.real)))

    def extent(self):
        return abs(self.z1) + abs(self.z2)

    def to_dict(self):
        return {"kind": "coherent", "z1": [self.z1.real, self.z1.imag], "z2": [self.z2.real, self.z2.imag]}


@dataclass(frozen=True)
class TwoModeSqueezedVacuum(StateSpec):
    """F2(p)|00> = (1/s*) exp((r/s*) a1+ a2+)|00>."""

    p: SymplecticParams
    gaussian = True

    def __post_init__(self):
        self.p.check(1e-10)
        if self.p.squeeze_ratio > TMSV_MAX_SQUEEZE + 1e-12:
            raise ConfigError(f"TMSV requires |r/s| <= {TMSV_MAX_SQUEEZE}, got {self.p.squeeze_ratio:.4f}")

    def fock(self, t):
        sc = self.p.s.conjugate()
        return FockState(gaussian_ket_amplitudes(1.0 / sc, 0.0, 0.0, self.p.r / sc, t.N))

    def plane_factors(self):
        m = sr_to_ray(self.p, 1e-10)
        return (GaussianPlane(((m.D, -m.B), (-m.C, m.A))),
                GaussianPlane(((m.D, m.B), (m.C, m.A))))

    def extent(self):
        m = sr_to_ray(self.p, 1e-10)
        return float(np.linalg.norm(m.as_array(), 2))

    def to_dict(self):
        s, r = self.p.s, self.p.r
        return {"kind": "tmsv", "s": [s.real, s.imag], "r": [r.real, r.imag]}


@dataclass(frozen=True)
class FockSuperposition(StateSpec):
    terms: tuple

    def __post_init__(self):
        terms = tuple((int(n1), int(n2), complex(c)) for n1, n2, c in self.terms)
        if not terms:
            raise ConfigError("Fock superposition needs at least one term")
        if any(n1 < 0 or n2 < 0 for n1, n2, _ in terms):
            raise ConfigError("photon numbers must be nonnegative")
        norm = sum(abs(c) ** 2 for _, _, c in terms)
        if abs(norm - 1.0) > 1e-12:
            raise ConfigError(f"Fock superposition has squared norm {norm!r}, expected 1 within 1e-12")
        object.__setattr__(self, "terms", terms)

    @property
    def max_photons(self) -> int:
        return max(max(n1, n2) for n1, n2, _ in self.terms)

    def fock(self, t):
        if self.max_photons >= t.N:
            raise ConfigError(f"Fock cutoff N={t.N} cannot hold |{self.max_photons}> components")
        amps = np.zeros((t.N, t.N), complex)
        for n1, n2, c in self.terms:
            amps[n1, n2] += c
        return FockState(amps)

    def extent(self):
        return float(np.sqrt(2.0 * (self.max_photons + 1)))

    def to_dict(self):
        return {"kind": "fock", "terms": [[n1, n2, [c.real, c.imag]] for n1, n2, c in self.terms]}


def state_from_dict(d: dict) -> StateSpec:
    def cplx(v):
        if isinstance(v, (list, tuple)):
            return complex(v[0], v[1])
        return complex(v)

    kind = d.get("kind")
    if kind == "vacuum":
        return Vacuum()
    if kind == "coherent":
        return Coherent(cplx(d["z1"]), cplx(d["z2"]))
    if kind == "tmsv":
        if "abcd" in d:
            from .symplectic import RayMatrix, ray_to_sr
            return TwoModeSqueezedVacuum(ray_to_sr(RayMatrix(*d["abcd"]), 1e-9))
        if "squeeze" in d:
            lam = np.arctanh(float(d["squeeze"]))
            return TwoModeSqueezedVacuum(SymplecticParams(np.cosh(lam), np.sinh(lam)))
        return TwoModeSqueezedVacuum(SymplecticParams(cplx(d["s"]), cplx(d["r"])))
    if kind == "fock":
        return FockSuperposition(tuple((t[0], t[1], cplx(t[2])) for t in d["terms"]))
    raise ConfigError(f"unknown state kind {kind!r} (expected vacuum, coherent, tmsv or fock)")


def tmsv_from_squeeze(ratio: float) -> TwoModeSqueezedVacuum:
    """Real (s, r) = (cosh l, sinh l) with tanh l = ratio."""
    lam = np.arctanh(ratio)
    return TwoModeSqueezedVacuum(SymplecticParams(np.cosh(lam), np.sinh(lam)))


def benchmark_states() -> dict:
    """The four states the acceptance suite exercises."""
    h = 1 / np.sqrt(2)
    return {
        "vacuum": Vacuum(),
        "coherent": Coherent(0.3, -0.2j),
        "tmsv": tmsv_from_squeeze(0.3),
        "superposition": FockSuperposition(((0, 0, h), (1, 1, h))),
    }
