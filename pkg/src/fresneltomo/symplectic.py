"""Ray-transfer matrices and the complex (s, r) parametrisation of
two-mode Fresnel operators.

The bijection is

    s = (A + D - i(B - C)) / 2,    r = -(A - D + i(B + C)) / 2

and the product of two operators corresponds to the product of the
2x2 matrices [[s, -r], [-r*, s*]], which is in turn the ABCD product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnimodularityError

ALGEBRAIC_TOL = 1e-12
CHAIN_TOL = 1e-10


@dataclass(frozen=True)
class RayMatrix:
    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        for name in "ABCD":
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def det(self) -> float:
        return self.A * self.D - self.B * self.C

    def as_array(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.C, self.D]])

    @classmethod
    def from_array(cls, m) -> "RayMatrix":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def check(self, tol: float = ALGEBRAIC_TOL) -> "RayMatrix":
        residual = abs(self.det - 1.0)
        if not np.isfinite(residual) or residual > tol:
            raise UnimodularityError(
                f"ray matrix ({self.A}, {self.B}, {self.C}, {self.D}) has "
                f"determinant {self.det!r}, expected 1 (|AD-BC-1| = {residual:.3e})"
            )
        return self

    def __matmul__(self, other: "RayMatrix") -> "RayMatrix":
        return RayMatrix.from_array(self.as_array() @ other.as_array())


@dataclass(frozen=True)
class SymplecticParams:
    s: complex
    r: complex

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "r", complex(self.r))

    @property
    def residual(self) -> float:
        return abs(abs(self.s) ** 2 - abs(self.r) ** 2 - 1.0)

    @property
    def squeeze_ratio(self) -> float:
        """|r/s|, the quantity that controls Fock-space truncation error."""
        return abs(self.r / self.s)

    def check(self, tol: float = ALGEBRAIC_TOL) -> "SymplecticParams":
        if not np.isfinite(self.residual) or self.residual > tol:
            raise UnimodularityError(
                f"(s, r) = ({self.s}, {self.r}) violates |s|^2 - |r|^2 = 1 "
                f"(residual {self.residual:.3e})"
            )
        return self

    def as_su11(self) -> np.ndarray:
        s, r = self.s, self.r
        return np.array([[s, -r], [-r.conjugate(), s.conjugate()]])

    @classmethod
    def from_su11(cls, m) -> "SymplecticParams":
        return cls(m[0, 0], -m[0, 1])

    def inverse(self) -> "SymplecticParams":
        return SymplecticParams(self.s.conjugate(), -self.r)


IDENTITY = SymplecticParams(1.0, 0.0)


def ray_to_sr(m: RayMatrix, tol: float = ALGEBRAIC_TOL) -> SymplecticParams:
    m.check(tol)
    s = 0.5 * complex(m.A + m.D, -(m.B - m.C))
    r = -0.5 * complex(m.A - m.D, m.B + m.C)
    return SymplecticParams(s, r)


def sr_to_ray(p: SymplecticParams, tol: float = ALGEBRAIC_TOL) -> RayMatrix:
    p.check(tol)
    s, r = p.s, p.r
    return RayMatrix(s.real - r.real, -s.imag - r.imag, s.imag - r.imag, s.real + r.real)


def compose(p1: SymplecticParams, p2: SymplecticParams) -> SymplecticParams:
    """Parameters of F(p1) F(p2), i.e. p2 acts first.

    Matches ``ray_to_sr(sr_to_ray(p1) @ sr_to_ray(p2))``.
    """
    p1.check(CHAIN_TOL)
    p2.check(CHAIN_TOL)
    return SymplecticParams.from_su11(p1.as_su11() @ p2.as_su11())


def random_params(rng: np.random.Generator, max_r: float = 2.0) -> SymplecticParams:
    """Draw a valid (s, r): r uniform in the disk |r| <= max_r, s with
    uniform phase and |s| = sqrt(1 + |r|^2)."""
    rad = max_r * np.sqrt(rng.uniform())
    r = rad * np.exp(2j * np.pi * rng.uniform())
    s = np.sqrt(1.0 + abs(r) ** 2) * np.exp(2j * np.pi * rng.uniform())
    return SymplecticParams(s, r)


def random_ray_matrix(rng: np.random.Generator, max_r: float = 2.0) -> RayMatrix:
    return sr_to_ray(random_params(rng, max_r))


def free_space(d: float) -> RayMatrix:
    return RayMatrix(1.0, d, 0.0, 1.0)


def thin_lens(f: float) -> RayMatrix:
    return RayMatrix(1.0, 0.0, -1.0 / f, 1.0)
