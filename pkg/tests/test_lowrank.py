import math

import numpy as np
import pytest

from polyrank import (
    OptimizerConfig,
    bombieri_norm,
    greedy_approximate,
    hard_family,
    operator_norm,
    pow_linear,
    reconstruct,
    step_bound,
    zero_poly,
)
from polyrank.generators import bombieri_gaussian, sparse_gaussian

CFG = OptimizerConfig(restarts=8, seed=11)


def test_step_bound():
    assert step_bound(1.0) == 1
    assert step_bound(0.5) == 4
    assert step_bound(0.3) == 11
    assert step_bound(0.8) == 1
    with pytest.raises(ValueError):
        step_bound(0.0)
    with pytest.raises(ValueError):
        step_bound(1.5)


def test_greedy_exact_power(rng):
    u = rng.standard_normal(5)
    u /= np.linalg.norm(u)
    p = 7.0 * pow_linear(u, 3)
    a = greedy_approximate(p, 0.5, CFG)
    assert len(a.terms) == 1
    assert abs(a.terms[0].lam) == pytest.approx(7.0, rel=1e-8)
    assert a.residual_opnorm_est[-1] <= 1e-6


def test_greedy_hard_family_stops_immediately():
    # sphere max is 1 while the Bombieri norm is 4, so eps = 0.3 already passes
    p = hard_family(16)
    a = greedy_approximate(p, 0.3, CFG)
    assert len(a.terms) == 0
    assert a.residual_opnorm_est == (pytest.approx(1.0, rel=1e-9),)


def test_greedy_random_cubic_bound(rng):
    p = bombieri_gaussian(6, 3, rng)
    a = greedy_approximate(p, 0.5, CFG)
    assert len(a.terms) <= 4
    assert a.residual_opnorm_est[-1] <= 0.5 * a.input_norm + 1e-9


def test_greedy_eps_one_never_steps(rng):
    p = bombieri_gaussian(5, 2, rng)
    a = greedy_approximate(p, 1.0, CFG)
    assert len(a.terms) == 0


def test_greedy_preconditions():
    with pytest.raises(ValueError):
        greedy_approximate(zero_poly(3, 2), 0.5, CFG)
    with pytest.raises(ValueError):
        greedy_approximate(hard_family(3), 0.0, CFG)
    with pytest.raises(ValueError):
        greedy_approximate(hard_family(3), 1.0001, CFG)


def test_greedy_energy_identity_and_monotonicity(rng):
    for d in (2, 3):
        p = bombieri_gaussian(5, d, rng)
        a = greedy_approximate(p, 0.3, CFG)
        # strictly decreasing residual norms
        for lo, hi in zip(a.residual_bombieri[1:], a.residual_bombieri):
            assert lo < hi
        energy = sum(t.lam ** 2 for t in a.terms) + a.residual_bombieri[-1] ** 2
        assert energy == pytest.approx(a.input_norm ** 2, rel=1e-7)
        # per-step drop is exactly lam^2 by orthogonality
        for i, t in enumerate(a.terms):
            drop = a.residual_bombieri[i] ** 2 - a.residual_bombieri[i + 1] ** 2
            assert drop == pytest.approx(t.lam ** 2, rel=1e-8, abs=1e-10)
        # every executed step cleared the threshold
        for t in a.terms:
            assert t.lam ** 2 > (0.3 * a.input_norm) ** 2


def test_greedy_step_bound_small_sweep(rng):
    for d in (2, 3):
        for eps in (0.3, 0.5, 0.8):
            for _ in range(3):
                p = sparse_gaussian(5, d, 10, rng)
                if p.is_zero:
                    continue
                a = greedy_approximate(p, eps, CFG)
                assert len(a.terms) <= step_bound(eps)
                assert a.residual_opnorm_est[-1] <= eps * a.input_norm + 1e-9 * a.input_norm


def test_reconstruct_examples(rng):
    empty = greedy_approximate(hard_family(16), 0.3, CFG)
    assert reconstruct(empty, 16, 2).is_zero
    one = greedy_approximate(1.0 * pow_linear(np.eye(3)[0], 2), 0.5, CFG)
    q = reconstruct(one, 3, 2)
    assert q.terms[(2, 0, 0)] == pytest.approx(1.0, rel=1e-9)
    # two orthogonal planted terms reconstruct to the planted sum
    p = pow_linear(np.eye(4)[0], 2) + pow_linear(np.eye(4)[1], 2)
    a = greedy_approximate(p, 0.4, CFG)
    back = reconstruct(a, 4, 2)
    assert bombieri_norm(back - p) <= 1e-6 * bombieri_norm(p)


def test_greedy_reconstruction_error_matches_residual(rng):
    p = bombieri_gaussian(5, 3, rng)
    a = greedy_approximate(p, 0.4, CFG)
    q = reconstruct(a, 5, 3)
    assert bombieri_norm(p - q) == pytest.approx(a.residual_bombieri[-1], rel=1e-9, abs=1e-12)


def test_hard_family_values():
    assert hard_family(1).terms == {(2,): 1.0}
    p3 = hard_family(3)
    assert p3.terms == {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0}
    assert bombieri_norm(p3) == pytest.approx(math.sqrt(3.0), rel=1e-12)


def test_hard_family_eckart_young_floor():
    # forcing steps with a small eps shows the Bombieri error cannot drop
    # faster than the matrix-rank floor allows
    n = 8
    p = hard_family(n)
    a = greedy_approximate(p, 0.2, CFG)
    assert len(a.terms) >= 4
    for k in range(1, 4):
        rel_err = a.residual_bombieri[k] / a.input_norm
        floor = math.sqrt((n - 2 * k) / n)
        assert rel_err >= floor - 1e-6
