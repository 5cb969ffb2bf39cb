"""Spin-1/2 operators, the two-particle singlet and the dot-product operator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .errors import NotUnit, VerificationFailed

UNIT_TOL = 1e-9

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# two-particle basis order: |1+>|2+>, |1+>|2->, |1->|2+>, |1->|2->
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


@dataclass(frozen=True)
class Direction:
    """A unit 3-vector.  Construction renormalizes inputs that are unit within 1e-9."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        v = np.array([self.x, self.y, self.z], dtype=float)
        if not np.all(np.isfinite(v)):
            raise NotUnit("direction has non-finite components")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > UNIT_TOL:
            raise NotUnit(f"direction norm {norm!r} is not 1 within {UNIT_TOL}")
        v = v / norm
        object.__setattr__(self, "x", float(v[0]))
        object.__setattr__(self, "y", float(v[1]))
        object.__setattr__(self, "z", float(v[2]))

    @classmethod
    def planar(cls, theta: float) -> "Direction":
        """Direction at angle ``theta`` (radians) in the x-y measurement plane."""
        return cls(math.cos(theta), math.sin(theta), 0.0)

    @classmethod
    def from_degrees(cls, deg: float) -> "Direction":
        return cls.planar(math.radians(deg))

    @classmethod
    def coerce(cls, a) -> "Direction":
        if isinstance(a, Direction):
            return a
        x, y, z = (float(c) for c in a)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z


@dataclass(frozen=True)
class SingletState:
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def expectation(self, op) -> float:
        psi = self.amplitudes
        return float(np.real(np.vdot(psi, np.asarray(op) @ psi)))


def pauli(axis: str) -> np.ndarray:
    try:
        return SIGMA[axis].copy()
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None


def spin_component_operator(a) -> np.ndarray:
    """``sigma . a`` for a unit direction ``a``; eigenvalues are -1 and +1."""
    d = Direction.coerce(a)
    return d.x * SIGMA["x"] + d.y * SIGMA["y"] + d.z * SIGMA["z"]


def singlet_state() -> SingletState:
    c = 1.0 / math.sqrt(2.0)
    return SingletState(np.array([0.0, c, -c, 0.0], dtype=complex))


def dot_operator() -> np.ndarray:
    """sigma_1 . sigma_2 on the two-particle space."""
    return sum(qmath.tensor_product(SIGMA[k], SIGMA[k]) for k in "xyz")


def spin_rotation(axis: str, angle: float) -> np.ndarray:
    """2x2 unitary ``U`` with ``U^dagger (sigma.a) U = sigma.(R a)``.

    ``R`` is the right-handed rotation by ``angle`` radians about the given
    coordinate axis.
    """
    s = pauli(axis)
    return math.cos(angle / 2) * np.eye(2) + 1j * math.sin(angle / 2) * s


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    if axis == "z":
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")


def verify_eta_spectrum(tol: float = 1e-9, operator=None) -> dict:
    """Check that the dot-product operator has spectrum {-3 (x1), +1 (x3)}
    with the singlet as its -3 eigenvector.

    ``operator`` defaults to :func:`dot_operator`; pass a modified matrix to
    exercise the failure path.  Raises :class:`VerificationFailed` with the
    measured discrepancy.
    """
    op = dot_operator() if operator is None else qmath.as_matrix(operator)
    spec = qmath.hermitian_eigen(op, tol=max(tol, qmath.DEFAULT_TOL))
    expected = np.array([-3.0, 1.0, 1.0, 1.0])
    value_err = float(np.max(np.abs(spec.values - expected)))
    overlap = abs(np.vdot(singlet_state().amplitudes, spec.vectors[:, 0]))
    report = {
        "eigenvalues": [float(v) for v in spec.values],
        "multiplicities": [m for _, m in spec.multiplicities(tol=1e-6)],
        "singlet_eigenvalue": float(spec.values[0]),
        "singlet_overlap": float(overlap),
    }
    if value_err > tol:
        raise VerificationFailed(
            f"eigenvalues {report['eigenvalues']} deviate from (-3, 1, 1, 1) by {value_err:.3e}",
            discrepancy=value_err,
        )
    if overlap < 1.0 - tol:
        raise VerificationFailed(
            f"singlet overlap with the -3 eigenvector is {overlap:.12f}",
            discrepancy=1.0 - overlap,
        )
    report["pass"] = True
    return report
