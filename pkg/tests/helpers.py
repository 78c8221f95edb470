"""Shared construction helpers for the test suite."""

import numpy as np

from bellgap import (
    Behavior,
    BellFunctional,
    DeterministicStrategy,
    Scenario,
    strategy_behavior,
    tilted_behavior,
)


def random_functional(sc: Scenario, rng, scale=2.0, with_marginals=True) -> BellFunctional:
    marg_a = rng.uniform(-scale, scale, sc.marginal_shape) if with_marginals else None
    marg_b = rng.uniform(-scale, scale, sc.marginal_shape) if with_marginals else None
    return BellFunctional(sc, rng.uniform(-scale, scale, sc.joint_shape), marg_a, marg_b)


def random_strategy(sc: Scenario, rng) -> DeterministicStrategy:
    return DeterministicStrategy(
        tuple(int(v) for v in rng.integers(sc.d, size=sc.m)),
        tuple(int(v) for v in rng.integers(sc.d, size=sc.m)),
    )


def random_ns_behavior(sc: Scenario, rng, n_components=24, include_quantum=False) -> Behavior:
    """Random no-signaling behavior: a mixture of local vertices.

    With include_quantum (two-setting, two-outcome scenarios only) one
    component is an entangled behavior, so the mixture leaves the local
    polytope while staying no-signaling.
    """
    parts = [strategy_behavior(random_strategy(sc, rng), sc).p for _ in range(n_components)]
    if include_quantum and (sc.m, sc.d) == (2, 2):
        parts.append(tilted_behavior(float(rng.uniform(0.0, 2.0))).p)
    weights = rng.dirichlet(np.ones(len(parts)))
    return Behavior(sc, np.tensordot(weights, np.stack(parts), axes=1))


def signaling_behavior(sc: Scenario, rng, eps=0.02) -> Behavior:
    """No-signaling mixture plus a one-block marginal shift of size eps.

    The shift moves weight between Bob's outcomes inside a single setting
    block only, so his marginal depends on Alice's setting afterwards.
    """
    base = random_ns_behavior(sc, rng)
    p = 0.7 * base.p + 0.3 / sc.d**2
    shift = np.zeros(sc.joint_shape)
    shift[0, 0, 0, 0] = eps
    shift[0, 0, 0, 1] = -eps
    return Behavior(sc, p + shift)
