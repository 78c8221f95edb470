"""Exact local-hidden-variable bounds by deterministic-strategy enumeration.

The LHV maximum of a Bell functional is attained at deterministic
strategies (one fixed outcome per setting and party), so the bound is the
maximum of d^(2m) linear scores.  Two equivalent enumeration routes are
used: small scenarios precompute the full strategy-table matrix, larger
ones enumerate Alice's assignments and exploit that Bob's best response
decomposes per setting.  Both enumerate in lexicographic order on
(assign_a, assign_b).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Behavior, BellFunctional, Scenario, INTERNAL_TOL
from .errors import CapacityError, DomainError, ShapeMismatchError

DEFAULT_ENUMERATION_CAP = 100_000_000

# Below this many strategy pairs the full score matrix is cached; one
# matrix-vector product then yields all scores at once.
_MATRIX_PATH_LIMIT = 4096


@dataclass(frozen=True)
class DeterministicStrategy:
    """Fixed outcome assignments x -> a and y -> b for the two parties."""

    assign_a: tuple[int, ...]
    assign_b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assign_a", tuple(int(v) for v in self.assign_a))
        object.__setattr__(self, "assign_b", tuple(int(v) for v in self.assign_b))
        if any(v < 0 for v in self.assign_a + self.assign_b):
            raise DomainError("strategy outcomes must be nonnegative")


@dataclass(frozen=True)
class LhvResult:
    """LHV bound together with every strategy achieving it (up to ties)."""

    bound: float
    maximizers: tuple[DeterministicStrategy, ...]


@lru_cache(maxsize=None)
def _assignment_array(m: int, d: int) -> np.ndarray:
    """All d^m outcome assignments, lexicographic, shape (d^m, m)."""
    arr = np.array(list(itertools.product(range(d), repeat=m)), dtype=np.intp)
    arr = arr.reshape(d**m, m)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _strategy_tables(m: int, d: int):
    """One-hot joint/marginal tables of all strategy pairs, lexicographic.

    Returns (J, MA, MB) with shapes (n, m*m*d*d), (n, m*d), (n, m*d) where
    n = d^(2m); row k corresponds to alice index k // d^m, bob index
    k % d^m into the lexicographic assignment array.
    """
    assign = _assignment_array(m, d)
    n_side = assign.shape[0]
    n = n_side * n_side
    alice = np.repeat(np.arange(n_side), n_side)
    bob = np.tile(np.arange(n_side), n_side)
    ax = assign[alice]  # (n, m): Alice's outcome for each x
    by = assign[bob]  # (n, m): Bob's outcome for each y

    xs = np.arange(m)
    rows = np.arange(n)
    joint = np.zeros((n, m, m, d, d))
    joint[rows[:, None, None], xs[None, :, None], xs[None, None, :],
          ax[:, :, None], by[:, None, :]] = 1.0
    marg_a = np.zeros((n, m, d))
    marg_a[rows[:, None], xs[None, :], ax] = 1.0
    marg_b = np.zeros((n, m, d))
    marg_b[rows[:, None], xs[None, :], by] = 1.0

    tables = (joint.reshape(n, -1), marg_a.reshape(n, -1), marg_b.reshape(n, -1))
    for t in tables:
        t.setflags(write=False)
    return tables


def _check_cap(scenario: Scenario, enumeration_cap: int) -> int:
    total = scenario.d ** (2 * scenario.m)
    if total > enumeration_cap:
        raise CapacityError(
            f"{total} deterministic strategies exceed the enumeration cap {enumeration_cap}"
        )
    return total


def _matrix_scores(functional: BellFunctional) -> np.ndarray:
    m, d = functional.scenario.m, functional.scenario.d
    tables_j, tables_a, tables_b = _strategy_tables(m, d)
    scores = tables_j @ functional.joint.ravel()
    if not functional.is_joint_only:
        scores = scores + tables_a @ functional.marginal_a.ravel()
        scores = scores + tables_b @ functional.marginal_b.ravel()
    return scores


def _alice_scores(functional: BellFunctional):
    """Per-Alice-assignment data for the best-response route.

    Returns (scores, resp, base) where resp[i, y, b] is the total weight of
    Bob answering b on setting y given Alice's i-th assignment, base[i] is
    Alice's own marginal contribution, and scores[i] is the best total.
    """
    m, d = functional.scenario.m, functional.scenario.d
    assign = _assignment_array(m, d)
    xs = np.arange(m)
    # joint transposed to [x, a, y, b], then Alice's outcomes gathered per x.
    j_xayb = functional.joint.transpose(0, 2, 1, 3)
    resp = j_xayb[xs[None, :], assign].sum(axis=1) + functional.marginal_b[None, :, :]
    base = functional.marginal_a[xs[None, :], assign].sum(axis=1)
    scores = base + resp.max(axis=2).sum(axis=1)
    return scores, resp, base


def lhv_bound(
    functional: BellFunctional,
    *,
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP,
    tie_tolerance: float | None = None,
) -> LhvResult:
    """Exact LHV bound and all maximizing strategies, by exhaustive enumeration."""
    sc = functional.scenario
    total = _check_cap(sc, enumeration_cap)
    n_side = sc.d**sc.m
    assign = _assignment_array(sc.m, sc.d)

    if total <= _MATRIX_PATH_LIMIT:
        scores = _matrix_scores(functional)
        bound = float(scores.max())
        if tie_tolerance is None:
            tie_tolerance = 1e-9 * max(1.0, abs(bound))
        hits = np.nonzero(scores >= bound - tie_tolerance)[0]
        maximizers = tuple(
            DeterministicStrategy(tuple(assign[k // n_side]), tuple(assign[k % n_side]))
            for k in hits
        )
        return LhvResult(bound, maximizers)

    scores, resp, base = _alice_scores(functional)
    bound = float(scores.max())
    if tie_tolerance is None:
        tie_tolerance = 1e-9 * max(1.0, abs(bound))
    maximizers = []
    for i in np.nonzero(scores >= bound - tie_tolerance)[0]:
        budget = scores[i] - bound + tie_tolerance
        deficits = resp[i].max(axis=1)[:, None] - resp[i]  # (y, b), all >= 0
        allowed = [np.nonzero(deficits[y] <= budget)[0] for y in range(sc.m)]
        for choice in itertools.product(*allowed):
            if deficits[np.arange(sc.m), choice].sum() <= budget:
                maximizers.append(
                    DeterministicStrategy(tuple(assign[i]), tuple(int(b) for b in choice))
                )
    return LhvResult(bound, tuple(maximizers))


def lhv_subgradient(
    functional: BellFunctional, *, enumeration_cap: int = DEFAULT_ENUMERATION_CAP
) -> np.ndarray:
    """Joint table of the lexicographically first maximizer.

    The LHV bound is a maximum of finitely many linear functions of the
    coefficients, so any maximizer's joint table is a subgradient with
    respect to the joint block; the lexicographic tie-break makes the
    choice deterministic.
    """
    sc = functional.scenario
    total = _check_cap(sc, enumeration_cap)
    n_side = sc.d**sc.m
    assign = _assignment_array(sc.m, sc.d)

    if total <= _MATRIX_PATH_LIMIT:
        tables_j = _strategy_tables(sc.m, sc.d)[0]
        k = int(np.argmax(_matrix_scores(functional)))
        return tables_j[k].reshape(sc.joint_shape).copy()

    scores, resp, _ = _alice_scores(functional)
    i = int(np.argmax(scores))
    best_b = resp[i].argmax(axis=1)
    table = np.zeros(sc.joint_shape)
    xs = np.arange(sc.m)
    table[xs[:, None], xs[None, :], assign[i][:, None], best_b[None, :]] = 1.0
    return table


def strategy_behavior(strategy: DeterministicStrategy, scenario: Scenario) -> Behavior:
    """Deterministic behavior (local-polytope vertex) realizing the strategy."""
    if len(strategy.assign_a) != scenario.m or len(strategy.assign_b) != scenario.m:
        raise ShapeMismatchError(
            f"strategy length {len(strategy.assign_a)}/{len(strategy.assign_b)} "
            f"does not match m={scenario.m}"
        )
    if max(strategy.assign_a + strategy.assign_b) >= scenario.d:
        raise DomainError(f"strategy outcomes must be < d={scenario.d}")
    p = np.zeros(scenario.joint_shape)
    xs = np.arange(scenario.m)
    a = np.asarray(strategy.assign_a, dtype=np.intp)
    b = np.asarray(strategy.assign_b, dtype=np.intp)
    p[xs[:, None], xs[None, :], a[:, None], b[None, :]] = 1.0
    return Behavior(scenario, p, tol=INTERNAL_TOL)


def make_joint_bound_oracle(scenario: Scenario, *, enumeration_cap: int = DEFAULT_ENUMERATION_CAP):
    """Fast evaluator s_flat, tau -> (bound, gradient_flat) for joint-only coefficients.

    At tau = 0 the bound is the exact LHV maximum and the gradient is the
    lexicographically first maximizer's table.  For tau > 0 both are
    replaced by the log-sum-exp softening

        C_tau(s) = tau * log(sum_k exp(score_k / tau)),

    a smooth convex upper bound on C whose gradient blends the tables of
    near-maximal strategies; optimizers anneal tau to zero to avoid
    stalling on the kinks of the exact bound.  Precomputes per-scenario
    enumeration structures once; the returned gradient row must not be
    mutated.
    """
    total = _check_cap(scenario, enumeration_cap)
    m, d = scenario.m, scenario.d

    if total <= _MATRIX_PATH_LIMIT:
        tables_j = _strategy_tables(m, d)[0]

        def oracle(s_flat: np.ndarray, tau: float = 0.0):
            scores = tables_j @ s_flat
            if tau <= 0.0:
                k = int(np.argmax(scores))
                return float(scores[k]), tables_j[k]
            peak = scores.max()
            w = np.exp((scores - peak) / tau)
            z = w.sum()
            return float(peak + tau * np.log(z)), tables_j.T @ (w / z)

        return oracle

    assign = _assignment_array(m, d)
    xs = np.arange(m)
    # One-hot of Alice's assignments, used to scatter softmax weights.
    n_side = assign.shape[0]
    a_hot = np.zeros((n_side, m, d))
    a_hot[np.arange(n_side)[:, None], xs[None, :], assign] = 1.0

    def oracle(s_flat: np.ndarray, tau: float = 0.0):
        joint = s_flat.reshape(scenario.joint_shape)
        resp = joint.transpose(0, 2, 1, 3)[xs[None, :], assign].sum(axis=1)
        if tau <= 0.0:
            scores = resp.max(axis=2).sum(axis=1)
            i = int(np.argmax(scores))
            best_b = resp[i].argmax(axis=1)
            table = np.zeros(scenario.joint_shape)
            table[xs[:, None], xs[None, :], assign[i][:, None], best_b[None, :]] = 1.0
            return float(scores[i]), table.ravel()
        # The pair sum factorizes over Bob's settings for fixed Alice
        # assignment, so the log-sum-exp needs only d^m * m * d work.
        peak_b = resp.max(axis=2, keepdims=True)
        w_b = np.exp((resp - peak_b) / tau)
        z_b = w_b.sum(axis=2, keepdims=True)
        per_alice = (peak_b[:, :, 0] + tau * np.log(z_b[:, :, 0])).sum(axis=1)
        peak = per_alice.max()
        w_a = np.exp((per_alice - peak) / tau)
        z_a = w_a.sum()
        bound = peak + tau * np.log(z_a)
        grad = np.einsum("i,ixa,iyb->xyab", w_a / z_a, a_hot, w_b / z_b)
        return float(bound), grad.ravel()

    return oracle
