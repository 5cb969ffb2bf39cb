"""Does a single probability space carry A, A', B, B' with the observed pairwise pmfs?

The unknowns are the 16 atom probabilities of a pmf on ``{+1,-1}^4``.  A
pairwise pmf of two +-1 variables is fixed by their two means and their
correlation, so matching the four pmfs is the same as matching nine moments:
total mass, the four means and the four cross correlations.  Feasibility of
that system with nonnegative unknowns is decided by a phase-one simplex in
exact rational arithmetic, after rounding the inputs to 12 decimals.

Rounding moves each moment by up to 5e-13, which is enough to push a family
lying exactly on a CHSH facet (the sign-cos model does this over wide angle
ranges) just outside it.  The rounded moments are therefore mixed with the
independent fair-coin point, ``m -> (1 - 1e-10) m``, before deciding.  That
moves every boundary family strictly inside; only families violating a bound
by less than about 1e-10 change verdict.

The verdict is cross-checked against the eight CHSH-type inequalities
``-2 <= S_k <= 2``, which are necessary and sufficient for this scenario.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import InconsistentMarginals, InsufficientData
from ..models import OUTCOMES, JointPMF
from ..relatedness import HYPERCUBE

DIGITS = 12
CONTRACTION = Fraction(1, 10**10)
MARGINAL_TOL = 1e-9
PAIR_NAMES = ("ab", "ab'", "a'b", "a'b'")
# coordinates in HYPERCUBE points: A=0, A'=1, B=2, B'=3
PAIR_COORDS = {"ab": (0, 2), "ab'": (0, 3), "a'b": (1, 2), "a'b'": (1, 3)}


def rationalize(x: float) -> Fraction:
    return round(Fraction(x), DIGITS)


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of :func:`joint_feasibility`.

    ``joint`` holds the 16 atom probabilities in :data:`HYPERCUBE` order when
    a witness exists; it matches the inputs up to the 1e-10 contraction.
    ``chsh_values`` maps each variant (named by the term carrying the minus
    sign) to its value on the rounded inputs; ``violated_inequality`` names
    the worst violated bound.
    """

    feasible: bool
    joint: np.ndarray | None
    joint_exact: tuple[Fraction, ...] | None
    chsh_values: dict[str, Fraction]
    violated_inequality: str | None
    violated_value: float | None
    criterion_feasible: bool

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "criterion_feasible": self.criterion_feasible,
            "joint": None if self.joint is None else [float(p) for p in self.joint],
            "chsh_values": {k: float(v) for k, v in self.chsh_values.items()},
            "violated_inequality": self.violated_inequality,
            "violated_value": self.violated_value,
        }


def _moments(pmfs: dict[str, JointPMF]) -> tuple[list[Fraction], dict[str, Fraction]]:
    """Consensus rational means of A, A', B, B' and the four rational correlations."""
    uses = {0: [], 1: [], 2: [], 3: []}
    for name in PAIR_NAMES:
        x, y = PAIR_COORDS[name]
        uses[x].append((name, pmfs[name].mean_a))
        uses[y].append((name, pmfs[name].mean_b))
    means = []
    labels = ("A", "A'", "B", "B'")
    for c in range(4):
        (n1, m1), (n2, m2) = uses[c]
        # a +-1 mean is twice the difference of its marginal probabilities
        if abs(m1 - m2) > 2 * MARGINAL_TOL:
            raise InconsistentMarginals(
                f"marginal of {labels[c]} differs between {n1} and {n2}: {m1!r} vs {m2!r}"
            )
        means.append(rationalize(0.5 * (m1 + m2)))
    corrs = {name: rationalize(pmfs[name].correlation) for name in PAIR_NAMES}
    return means, corrs


def chsh_variants(corrs: dict[str, Fraction]) -> dict[str, Fraction]:
    """The four ``S`` combinations, keyed by the pair that carries the minus sign."""
    total = sum(corrs.values())
    return {f"-{name}": total - 2 * corrs[name] for name in ("ab", "a'b", "ab'", "a'b'")}


def _pmfs_nonnegative(means, corrs) -> bool:
    for name in PAIR_NAMES:
        x, y = PAIR_COORDS[name]
        for s in OUTCOMES:
            for t in OUTCOMES:
                if 1 + s * means[x] + t * means[y] + s * t * corrs[name] < 0:
                    return False
    return True


def phase_one_simplex(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Find ``x >= 0`` with ``A x = b`` or return None.

    Dense tableau, artificial variables for every row, Bland's rule (so it
    terminates), exact arithmetic throughout.
    """
    m, n = len(A), len(A[0])
    rows = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        rows.append([sign * Fraction(v) for v in A[i]] + [Fraction(int(k == i)) for k in range(m)] + [sign * b[i]])
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs of the phase-one objective (sum of artificials)
    cost = [-sum(rows[i][j] for i in range(m)) for j in range(n)] + [Fraction(0)] * m
    obj = -sum(rows[i][-1] for i in range(m))
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            # cannot happen for phase one (objective bounded below by 0)
            raise RuntimeError("phase-one simplex unbounded")
        r = best[1]
        piv = rows[r][enter]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(m):
            f = rows[i][enter]
            if i != r and f != 0:
                rows[i] = [vi - f * vr for vi, vr in zip(rows[i], rows[r])]
        f = cost[enter]
        cost = [c - f * vr for c, vr in zip(cost, rows[r][:-1])]
        obj -= f * rows[r][-1]
        basis[r] = enter
    if obj != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = rows[i][-1]
    return x


def _moment_system(means, corrs):
    pts = HYPERCUBE
    A = [[Fraction(1)] * 16]
    b = [Fraction(1)]
    for c in range(4):
        A.append([Fraction(p[c]) for p in pts])
        b.append(means[c])
    for name in PAIR_NAMES:
        x, y = PAIR_COORDS[name]
        A.append([Fraction(p[x] * p[y]) for p in pts])
        b.append(corrs[name])
    return A, b


def joint_feasibility(pmf_ab: JointPMF, pmf_ab_prime: JointPMF, pmf_a_prime_b: JointPMF,
                      pmf_a_prime_b_prime: JointPMF) -> FeasibilityResult:
    """Decide whether one 16-atom pmf on (A, A', B, B') reproduces the four pairwise pmfs.

    Raises :class:`InconsistentMarginals` when a one-party marginal differs
    by more than 1e-9 between the two pmfs that contain it.
    """
    pmfs = {"ab": pmf_ab, "ab'": pmf_ab_prime, "a'b": pmf_a_prime_b, "a'b'": pmf_a_prime_b_prime}
    means, corrs = _moments(pmfs)
    variants = chsh_variants(corrs)
    keep = 1 - CONTRACTION
    means = [keep * m for m in means]
    corrs = {k: keep * c for k, c in corrs.items()}
    criterion = _pmfs_nonnegative(means, corrs) and all(abs(keep * v) <= 2 for v in variants.values())

    A, b = _moment_system(means, corrs)
    x = phase_one_simplex(A, b)

    worst = max(variants, key=lambda k: abs(variants[k]))
    violated = None
    value = None
    if abs(keep * variants[worst]) > 2:
        violated = f"S[{worst}] {'<= 2' if variants[worst] > 0 else '>= -2'}"
        value = float(variants[worst])
    return FeasibilityResult(
        feasible=x is not None,
        joint=None if x is None else np.array([float(v) for v in x]),
        joint_exact=None if x is None else tuple(x),
        chsh_values=variants,
        violated_inequality=violated,
        violated_value=value,
        criterion_feasible=criterion,
    )


def feasibility_for_pmfs(pmfs: dict[tuple[int, int], JointPMF]) -> FeasibilityResult:
    """:func:`joint_feasibility` on pmfs keyed by (alice index, bob index)."""
    return joint_feasibility(pmfs[(0, 0)], pmfs[(0, 1)], pmfs[(1, 0)], pmfs[(1, 1)])


def joint_pairwise_pmf(joint, pair: str) -> JointPMF:
    """Pairwise marginal of a 16-atom joint pmf (``pair`` in ``ab``, ``ab'``, ...)."""
    x, y = PAIR_COORDS[pair]
    p = np.zeros((2, 2))
    for w, pt in zip(joint, HYPERCUBE):
        p[OUTCOMES.index(pt[x]), OUTCOMES.index(pt[y])] += float(w)
    return JointPMF(p)


def empirical_pmfs(log, pool_marginals: bool = True) -> dict[tuple[int, int], JointPMF]:
    """Relative-frequency pmfs per setting pair from a trial log.

    Finite samples never have exactly matching one-party marginals across
    cells.  With ``pool_marginals`` each party's mean for a setting is
    estimated from every round using that setting, and each cell keeps its
    own correlation, which gives the consistent family the solver needs.
    The correlation is clipped to the range that keeps all four cell
    probabilities nonnegative under the pooled means; sampling noise can
    push it slightly outside (e.g. a perfectly correlated cell whose pooled
    means differ from its own).
    """
    oa = log.outcome_a.astype(float)
    ob = log.outcome_b.astype(float)
    out = {}
    for i in (0, 1):
        for j in (0, 1):
            mask = (log.alice_idx == i) & (log.bob_idx == j)
            n = int(mask.sum())
            if n == 0:
                raise InsufficientData(f"no rounds for setting pair ({i}, {j})")
            if pool_marginals:
                mean_a = float(oa[log.alice_idx == i].mean())
                mean_b = float(ob[log.bob_idx == j].mean())
                corr = float((oa[mask] * ob[mask]).mean())
                corr = min(max(corr, abs(mean_a + mean_b) - 1.0), 1.0 - abs(mean_a - mean_b))
                out[(i, j)] = JointPMF.from_moments(mean_a, mean_b, corr)
            else:
                x, y = oa[mask], ob[mask]
                p = np.array([[np.sum((x == s) & (y == t)) for t in OUTCOMES] for s in OUTCOMES]) / n
                out[(i, j)] = JointPMF(p)
    return out
