"""Relatedness of accessible variables and of their operators.

Operator level: two Hermitian operators with simple spectra are related when a
unitary ``W`` gives ``A_lambda = W^dagger A_theta W``.  That happens exactly
when the spectra coincide, and ``W`` is assembled from matched eigenbases.

Variable level: variables are arrays of values on a finite index space
``{0, ..., m-1}``, and ``lambda`` is related to ``theta`` under a group ``G``
of index permutations when ``lambda(n) = theta(g n)`` for some ``g`` in ``G``.
Non-relatedness is only ever asserted relative to an explicit group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import qmath
from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    IndexSpaceMismatch,
    NotHermitian,
    NotRelated,
)

RESIDUAL_TOL = 1e-8


# -- operators ---------------------------------------------------------------

@dataclass(frozen=True)
class OperatorPair:
    A_theta: np.ndarray
    A_lambda: np.ndarray
    tol: float = qmath.DEFAULT_TOL

    def __post_init__(self):
        A = qmath.as_matrix(self.A_theta)
        B = qmath.as_matrix(self.A_lambda)
        if A.shape != B.shape or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"operator shapes {A.shape} and {B.shape} differ or are not square")
        for name, M in (("A_theta", A), ("A_lambda", B)):
            if not qmath.is_hermitian(M, self.tol):
                raise NotHermitian(f"{name} is not Hermitian within {self.tol}")
        object.__setattr__(self, "A_theta", A)
        object.__setattr__(self, "A_lambda", B)


def _simple_spectrum(M: np.ndarray, tol: float, name: str) -> qmath.Spectrum:
    spec = qmath.hermitian_eigen(M, tol=max(tol, qmath.DEFAULT_TOL))
    gaps = np.diff(spec.values)
    if gaps.size and gaps.min() <= tol:
        raise DegenerateSpectrum(
            f"{name} has a repeated eigenvalue (smallest gap {gaps.min():.3e}); "
            "relatedness needs one-dimensional eigenspaces"
        )
    return spec


def operators_related(pair: OperatorPair, tol: float = qmath.DEFAULT_TOL) -> bool:
    """True iff both spectra are simple and agree within ``tol``.

    A repeated eigenvalue raises :class:`DegenerateSpectrum`: the operator
    does not belong to a maximal variable, so the question is undefined.
    """
    s1 = _simple_spectrum(pair.A_theta, tol, "A_theta")
    s2 = _simple_spectrum(pair.A_lambda, tol, "A_lambda")
    return bool(np.max(np.abs(s1.values - s2.values)) <= tol)


def relating_unitary(pair: OperatorPair, tol: float = qmath.DEFAULT_TOL) -> np.ndarray:
    """Unitary ``W`` with ``A_lambda = W^dagger A_theta W``.

    With ``A_theta = V1 D V1^dagger`` and ``A_lambda = V2 D V2^dagger`` (same
    sorted ``D``) the answer is ``W = V1 V2^dagger``.
    """
    try:
        s1 = _simple_spectrum(pair.A_theta, tol, "A_theta")
        s2 = _simple_spectrum(pair.A_lambda, tol, "A_lambda")
    except DegenerateSpectrum as exc:
        raise NotRelated(str(exc)) from exc
    if np.max(np.abs(s1.values - s2.values)) > tol:
        raise NotRelated(f"spectra differ: {s1.values} vs {s2.values}")
    W = s1.vectors @ qmath.dagger(s2.vectors)
    residual = qmath.max_abs(pair.A_lambda - qmath.dagger(W) @ pair.A_theta @ W)
    if residual > RESIDUAL_TOL * max(1.0, qmath.max_abs(pair.A_theta)):
        raise NotRelated(f"conjugation residual {residual:.3e} too large")
    return W


def conjugation_residual(A_theta, A_lambda, W) -> float:
    return qmath.max_abs(np.asarray(A_lambda) - qmath.dagger(W) @ np.asarray(A_theta) @ W)


def compose_relating_unitaries(W_k: np.ndarray, W_s: np.ndarray) -> np.ndarray:
    """Given ``A_eta = W_k^dagger A_theta W_k`` and ``A_xi = W_s^dagger A_theta W_s``,
    return ``W = W_k^dagger W_s`` with ``A_xi = W^dagger A_eta W``."""
    return qmath.dagger(W_k) @ W_s


# -- variables and groups ----------------------------------------------------

@dataclass(frozen=True)
class MaximalVariable:
    """A real-valued function on the index space ``{0, ..., size-1}``.

    ``maximal=True`` asserts that the values are pairwise distinct and is
    checked on construction.
    """

    name: str
    values: np.ndarray
    maximal: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("variable values must be a non-empty 1-D array")
        if self.maximal and len(np.unique(v)) != v.size:
            raise ValueError(f"variable {self.name!r} is flagged maximal but has repeated values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    def __call__(self, n):
        return self.values[n]

    def transformed(self, G: "TransformationGroup", g: int, name: str | None = None) -> "MaximalVariable":
        """The variable ``n -> self(g n)``."""
        return MaximalVariable(name or f"{self.name}*g{g}", self.values[G.perms[g]])


@dataclass
class TransformationGroup:
    """A finite group of permutations of ``{0, ..., size-1}``.

    Element ``g`` is stored as ``perms[g]`` with ``(g n) = perms[g][n]``;
    composition ``compose(g, h)`` is ``n -> g(h(n))``.  Closure, identity and
    inverses are verified on construction.  Element order is the canonical
    search order.
    """

    perms: np.ndarray
    name: str = "G"
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        P = np.array(self.perms, dtype=np.int64)
        if P.ndim != 2 or P.shape[0] == 0:
            raise ValueError("group needs a 2-D array of permutations")
        m = P.shape[1]
        for row in P:
            if not np.array_equal(np.sort(row), np.arange(m)):
                raise ValueError(f"{row.tolist()} is not a permutation of range({m})")
        self.perms = P
        self._index = {row.tobytes(): g for g, row in enumerate(P)}
        if len(self._index) != len(P):
            raise ValueError("group elements are not distinct")
        if np.arange(m).tobytes() not in self._index:
            raise ValueError("group has no identity element")
        # closure: every product perms[g][perms[h]] and every inverse must be an element
        inverses = np.empty_like(P)
        np.put_along_axis(inverses, P, np.arange(m)[None, :].repeat(len(P), axis=0), axis=1)
        if not self._contains_all(inverses):
            raise ValueError("set of permutations is not closed under inverses")
        chunk = max(1, 1_000_000 // (len(P) * m))
        for start in range(0, len(P), chunk):
            prods = P[:, P[start:start + chunk]].reshape(-1, m)
            if not self._contains_all(prods):
                raise ValueError("set of permutations is not closed under composition")

    def _contains_all(self, rows: np.ndarray) -> bool:
        m = self.perms.shape[1]
        if m ** m < 2 ** 62:
            # exact mixed-radix code of each permutation
            radix = m ** np.arange(m, dtype=np.int64)
            return bool(np.all(np.isin(rows @ radix, self.perms @ radix)))
        return all(row.tobytes() in self._index for row in rows)

    def __len__(self) -> int:
        return len(self.perms)

    @property
    def size(self) -> int:
        return self.perms.shape[1]

    @property
    def identity(self) -> int:
        return self._index[np.arange(self.size).tobytes()]

    def element(self, perm) -> int:
        return self._index[np.asarray(perm, dtype=np.int64).tobytes()]

    def compose(self, g: int, h: int) -> int:
        return self._index[self.perms[g][self.perms[h]].tobytes()]

    def inverse(self, g: int) -> int:
        inv = np.empty(self.size, dtype=np.int64)
        inv[self.perms[g]] = np.arange(self.size)
        return self._index[inv.tobytes()]

    @classmethod
    def cyclic(cls, m: int) -> "TransformationGroup":
        """Rotations of an ``m``-point circle; element ``r`` maps ``n -> n - r``.

        Hence ``theta.transformed(G, r)`` is ``theta`` rotated forward by ``r`` steps.
        """
        n = np.arange(m)
        return cls(np.array([(n - r) % m for r in range(m)]), name=f"C{m}")

    @classmethod
    def generated(cls, generators: Iterable[Sequence[int]], name: str = "G",
                  max_order: int = 100_000) -> "TransformationGroup":
        """Closure of ``generators`` under composition, identity first, BFS order."""
        gens = [np.asarray(g, dtype=np.int64) for g in generators]
        if not gens:
            raise ValueError("need at least one generator")
        m = gens[0].size
        ident = np.arange(m)
        seen = {ident.tobytes(): ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = g[p]
                    key = q.tobytes()
                    if key not in seen:
                        seen[key] = q
                        nxt.append(q)
                        if len(seen) > max_order:
                            raise ValueError(f"generated group exceeds {max_order} elements")
            frontier = nxt
        return cls(np.array(list(seen.values())), name=name)


def variables_related_under_group(theta: MaximalVariable, lam: MaximalVariable,
                                  G: TransformationGroup) -> int | None:
    """First ``g`` in ``G`` (canonical order) with ``lam(n) = theta(g n)`` for all ``n``, else None."""
    if theta.size != lam.size or theta.size != G.size:
        raise IndexSpaceMismatch(
            f"index spaces differ: theta {theta.size}, lambda {lam.size}, group {G.size}"
        )
    if not np.array_equal(np.sort(theta.values), np.sort(lam.values)):
        return None
    hits = np.all(theta.values[G.perms] == lam.values, axis=1)
    idx = np.flatnonzero(hits)
    return int(idx[0]) if idx.size else None


def value_multisets_equal(theta: MaximalVariable, lam: MaximalVariable) -> bool:
    """Whether some bijection of the index space relates the two variables."""
    return theta.size == lam.size and np.array_equal(np.sort(theta.values), np.sort(lam.values))


def theorem1_witness(theta: MaximalVariable, eta: MaximalVariable, xi: MaximalVariable,
                     G: TransformationGroup) -> dict:
    """Composition check for three variables under ``G``.

    When ``eta = theta o k`` and ``xi = theta o s``, the element ``k^-1 s``
    must carry ``eta`` to ``xi``; so a variable related to ``theta`` but not
    to ``eta`` cannot exist.  The report marks the vacuous case where one of
    the hypotheses fails.
    """
    k = variables_related_under_group(theta, eta, G)
    s = variables_related_under_group(theta, xi, G)
    report = {
        "names": [theta.name, eta.name, xi.name],
        "theta_eta": k,
        "theta_xi": s,
        "vacuous": k is None or s is None,
        "composed": None,
        "composed_valid": None,
        "eta_xi": None,
    }
    if not report["vacuous"]:
        h = G.compose(G.inverse(k), s)
        report["composed"] = h
        report["composed_valid"] = bool(np.array_equal(eta.values[G.perms[h]], xi.values))
        report["eta_xi"] = variables_related_under_group(eta, xi, G)
    report["pass"] = bool(report["vacuous"] or (report["composed_valid"] and report["eta_xi"] is not None))
    return report


def theorem1_random_search(trials: int, rng: np.random.Generator, max_points: int = 6) -> dict:
    """Randomized hunt for a triple violating the composition property.

    Each trial draws a small index space, a group generated by one or two
    random permutations, a random variable ``theta`` and two variables that
    are either transforms of ``theta`` or unrelated random draws.
    """
    counterexamples = []
    non_vacuous = 0
    for t in range(trials):
        m = int(rng.integers(2, max_points + 1))
        gens = [rng.permutation(m) for _ in range(int(rng.integers(1, 3)))]
        G = TransformationGroup.generated(gens)
        theta = MaximalVariable("theta", rng.integers(0, 3, size=m))

        def draw(name):
            if rng.random() < 0.75:
                return theta.transformed(G, int(rng.integers(len(G))), name)
            return MaximalVariable(name, rng.integers(0, 3, size=m))

        rep = theorem1_witness(theta, draw("eta"), draw("xi"), G)
        non_vacuous += not rep["vacuous"]
        if not rep["pass"]:
            counterexamples.append({"trial": t, "report": rep})
    return {"trials": trials, "non_vacuous": non_vacuous,
            "counterexamples": len(counterexamples), "examples": counterexamples[:5]}


# -- concrete variables ------------------------------------------------------

def circle_sign_cos_variable(angle_steps: int, m: int = 360, name: str | None = None) -> MaximalVariable:
    """``n -> sign(cos(2 pi (n - angle_steps) / m))`` with ties mapped to +1.

    The sign is decided on the integer offset ``(n - angle_steps) mod m``, so
    rotated copies agree exactly and ties land on the same offsets.
    """
    d = (np.arange(m) - int(angle_steps)) % m
    # sign(cos) >= 0 exactly when 4 d <= m or 4 d >= 3 m
    values = np.where((4 * d <= m) | (4 * d >= 3 * m), 1, -1)
    return MaximalVariable(name or f"sgncos[{angle_steps}]", values)


HYPERCUBE = tuple(itertools.product((1, -1), repeat=4))
THEOREM2_NAMES = ("A", "A'", "B", "B'", "C", "D")


def theorem2_variables() -> dict[str, MaximalVariable]:
    """Charlie's variables on the 16-point space ``{+1,-1}^4`` of (A, A', B, B').

    Besides the four coordinate projections: ``C = A (B + B')`` and
    ``D = |C| - 1``.  Point order is :data:`HYPERCUBE`.
    """
    pts = np.array(HYPERCUBE)
    A, A2, B, B2 = pts.T
    C = A * (B + B2)
    D = np.abs(C) - 1
    cols = (A, A2, B, B2, C, D)
    return {n: MaximalVariable(n, c) for n, c in zip(THEOREM2_NAMES, cols)}


def hypercube_sign_flip_group() -> TransformationGroup:
    """Flips of individual coordinates on ``{+1,-1}^4`` (16 elements)."""
    index = {p: k for k, p in enumerate(HYPERCUBE)}
    gens = []
    for c in range(4):
        gens.append([index[tuple(-x if i == c else x for i, x in enumerate(p))] for p in HYPERCUBE])
    return TransformationGroup.generated(gens, name="sign-flips")


def hypercube_signed_permutation_group() -> TransformationGroup:
    """Coordinate permutations combined with sign flips on ``{+1,-1}^4`` (384 elements)."""
    index = {p: k for k, p in enumerate(HYPERCUBE)}
    gens = []
    for c in range(4):
        gens.append([index[tuple(-x if i == c else x for i, x in enumerate(p))] for p in HYPERCUBE])
    for c in range(3):
        def swap(p, c=c):
            q = list(p)
            q[c], q[c + 1] = q[c + 1], q[c]
            return tuple(q)
        gens.append([index[swap(p)] for p in HYPERCUBE])
    return TransformationGroup.generated(gens, name="signed-permutations")


def angle_to_steps(deg: float, m: int = 360) -> int:
    """Grid index of an angle; raises ValueError when the angle is off-grid."""
    x = deg * m / 360.0
    k = round(x)
    if not math.isclose(x, k, abs_tol=1e-9):
        raise ValueError(f"angle {deg} deg is not on the {m}-point grid")
    return int(k) % m
