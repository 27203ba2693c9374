"""Ratio estimator: root algebra, candidate selection, the full iteration."""

import numpy as np
import pytest

from nrqae.channels import NoiseSpec
from nrqae.circuits import EXACT_DIVISION_GUARD, TSeries
from nrqae.errors import DepthGuardError, EstimationFailure
from nrqae.estimator import (
    SEED_GRID_SIZE,
    candidate_angles,
    fit_decay,
    fold_theta,
    merge_angles,
    ratio_y,
    roots_cos,
    run,
    seed_theta,
    select_candidate,
)
from nrqae.model import amplitude_problem, observable_problem


def plane_problem(delta):
    psi = np.array([1.0, 0.0])
    phi = np.array([np.cos(delta), np.sin(delta)])
    return amplitude_problem(psi, phi)


class StuckProvider:
    """Triplets whose middle entry always sits under the division guard."""

    def __init__(self):
        self.eps_div = EXACT_DIVISION_GUARD
        self.series = TSeries()

    def triplet(self, n, boost=1):
        return (1.0, 1e-12, 1.0)

    def calls_for(self, n, boost=1):
        return 0


def test_ratio_y_worked_values():
    assert abs(ratio_y(-0.25, -0.25, 0.5, 1e-9) + 2.0) < 1e-12
    assert abs(ratio_y(0.3, 0.3, 0.3, 1e-9) - 1.0) < 1e-12
    with pytest.raises(DepthGuardError):
        ratio_y(0.7071, 0.0, -0.7071, 1e-9)
    with pytest.raises(DepthGuardError):
        ratio_y(0.5, 1e-10, 0.5, 1e-9)


def test_ratio_y_envelope_invariance():
    """An envelope c * p^depth multiplying the series cancels exactly."""
    rng = np.random.default_rng(307)
    for _ in range(100):
        t1, t2, t3 = rng.uniform(-1, 1, 3)
        if abs(t2) < 1e-3:
            continue
        c = rng.uniform(0.1, 3.0) * rng.choice([-1.0, 1.0])
        p = rng.uniform(0.1, 1.5)
        n = int(rng.integers(1, 65))
        base = ratio_y(t1, t2, t3, 1e-12)
        scaled = ratio_y(c * p ** n * t1, c * p ** (2 * n) * t2,
                         c * p ** (3 * n) * t3, 0.0)
        assert abs(scaled - base) <= 1e-12 * abs(base)


def test_roots_cos_fixed_points():
    assert roots_cos(1.0) == [1.0]
    assert roots_cos(9.0 / 8.0) == []
    got = roots_cos(-2.0)
    assert len(got) == 2
    assert abs(got[0] + 0.5) < 1e-12
    assert abs(got[1] - 1.0 / 3.0) < 1e-12
    assert roots_cos(100.0) == []  # negative discriminant


def test_roots_cos_recovers_cosine():
    # y built from an exact cosine table always contains x = cos(2 n theta)
    rng = np.random.default_rng(311)
    done = 0
    while done < 200:
        theta = rng.uniform(0.0, np.pi)
        n = int(rng.integers(1, 65))
        t2 = np.cos(2 * n * theta)
        if abs(t2) < 1e-6:
            continue
        y = np.cos(n * theta) * np.cos(3 * n * theta) / t2 ** 2
        roots = roots_cos(y)
        assert any(abs(r - t2) < 1e-10 for r in roots)
        done += 1


def test_candidate_angles_literals():
    got = candidate_angles(-0.5, 1)
    assert np.allclose(got, [np.pi / 3, 2 * np.pi / 3], atol=1e-12)
    got = candidate_angles(0.0, 2)
    assert np.allclose(got, [np.pi / 8, 3 * np.pi / 8, 5 * np.pi / 8, 7 * np.pi / 8],
                       atol=1e-12)
    got = candidate_angles(1.0, 4)
    assert np.allclose(got, [0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi], atol=1e-12)
    with pytest.raises(ValueError):
        candidate_angles(0.5, 0)
    with pytest.raises(ValueError):
        candidate_angles(1.5, 1)


def test_candidate_angles_complete_and_consistent():
    rng = np.random.default_rng(313)
    for _ in range(100):
        theta = rng.uniform(0.0, np.pi)
        n = int(rng.integers(1, 65))
        x = float(np.cos(2 * n * theta))
        cands = candidate_angles(x, n)
        assert any(abs(c - theta) < 1e-9 for c in cands)
        for c in cands:
            assert 0.0 <= c <= np.pi + 1e-12
            assert abs(np.cos(2 * n * c) - x) < 1e-9


def test_merge_angles():
    assert merge_angles([0.5, 0.5 + 1e-13, 0.3]) == [0.3, 0.5]
    assert merge_angles([]) == []


def test_select_candidate():
    assert abs(select_candidate([np.pi / 3, 2 * np.pi / 3], 2.0) - 2 * np.pi / 3) < 1e-12
    assert abs(select_candidate([np.pi / 6, 5 * np.pi / 6], 0.5) - np.pi / 6) < 1e-12
    assert select_candidate([0.4, 0.6], 0.5) == 0.4  # tie toward the smaller
    with pytest.raises(ValueError):
        select_candidate([], 1.0)


def test_seed_theta_worked_triplet():
    # pi/3 would predict the sign pattern (+, -, -); only 2 pi / 3 fits (-, -, +)
    got = seed_theta((-0.25, -0.25, 0.5))
    assert abs(got - 2 * np.pi / 3) < 2 * np.pi / SEED_GRID_SIZE


def test_seed_theta_self_consistency():
    rng = np.random.default_rng(317)
    for _ in range(50):
        theta = rng.uniform(0.05, np.pi - 0.05)
        c = rng.uniform(0.1, 2.0)
        trip = tuple(c * np.cos(m * theta) for m in (1, 2, 3))
        assert abs(seed_theta(trip) - theta) <= np.pi / SEED_GRID_SIZE + 1e-12


def test_seed_theta_sees_through_decay():
    # with a per-depth envelope the pure-cosine reading would drift; the
    # joint (theta, p) grid keeps the angle honest
    rng = np.random.default_rng(331)
    for _ in range(25):
        theta = rng.uniform(0.3, np.pi - 0.3)
        p = rng.uniform(0.5, 0.95)
        trip = tuple(0.4 * p ** m * np.cos(m * theta) for m in (1, 2, 3))
        assert abs(seed_theta(trip) - theta) < 0.05


def test_seed_theta_zero_triplet():
    assert seed_theta((0.0, 0.0, 0.0)) == 0.0


def test_fold_theta():
    assert fold_theta(0.3) == 0.3
    assert abs(fold_theta(3.0) - (np.pi - 3.0)) < 1e-15
    assert abs(fold_theta(np.pi / 2) - np.pi / 2) < 1e-15


def test_fit_decay_recovers_envelope():
    theta = 2 * np.pi / 3
    series = TSeries()
    for n in (1, 2, 3, 4, 6, 8, 12):
        series.record(n, 0.5 * 0.95 ** n * np.cos(n * theta))
    assert abs(fit_decay(theta, series) - 0.95) < 1e-3
    # noiseless series fits p = 1 exactly (clamped from above)
    clean = TSeries()
    for n in (1, 2, 3):
        clean.record(n, 0.5 * np.cos(n * theta))
    assert abs(fit_decay(theta, clean) - 1.0) < 1e-6


def test_fit_decay_needs_two_usable_depths():
    theta = np.pi / 4  # cos(2 theta) = 0, cos(4 theta) = -1...
    series = TSeries()
    series.record(2, 0.0)  # excluded: |cos| below threshold
    series.record(4, -0.5)
    with pytest.raises(EstimationFailure):
        fit_decay(theta, series)


def test_run_worked_instance():
    res = run(plane_problem(np.pi / 6), k=3)
    assert abs(res.theta_ch - 2 * np.pi / 3) < 1e-9
    assert abs(res.value - 0.75) < 1e-9
    assert abs(res.mirror - 0.25) < 1e-9
    assert abs(res.theta - np.pi / 3) < 1e-9
    assert res.oracle_calls == 0
    assert all(rec.ok for rec in res.iterations)
    assert all(0.0 <= rec.selected <= np.pi for rec in res.iterations)
    assert abs(res.p_hat - 1.0) < 1e-6
    with pytest.raises(ValueError):
        run(plane_problem(np.pi / 6), k=-1)


def test_run_identical_states():
    psi = np.array([1.0, 0.0])
    res = run(amplitude_problem(psi, psi), k=4)
    assert res.value == 1.0
    assert res.theta_ch == 0.0
    assert res.iterations[0].ok
    assert res.p_hat is None


def test_run_observable_mode():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    z = np.array([[1.0, 0.0], [0.0, -1.0]])
    res = run(observable_problem(plus, z), k=4)
    assert abs(res.theta_ch - np.pi) < 1e-9
    assert abs(res.value) < 1e-9
    # a generic expectation lands on the principal branch
    obs = np.array([[0.6, 0.8], [0.8, -0.6]])
    res = run(observable_problem(np.array([1.0, 0.0]), obs), k=5)
    assert abs(res.value - 0.6) < 1e-9
    assert abs(res.mirror + 0.6) < 1e-9


def test_run_mirror_instance():
    # wide separation: theta_g > pi/2, so the estimate reads the folded
    # angle and the true amplitude appears as the mirror member
    delta = 1.2834315
    res = run(plane_problem(delta), k=5)
    a = np.cos(delta) ** 2
    assert abs(res.theta - (np.pi - 2 * delta)) < 1e-9
    assert abs(res.value - (1.0 - a)) < 1e-9
    assert abs(res.mirror - a) < 1e-9


def test_run_carries_through_guard_trips():
    # series phase pi/4 zeroes the depth-2 denominator, so iteration 0
    # fails and the first estimate comes from depth 2
    res = run(plane_problem(np.pi / 16), k=5)
    assert not res.iterations[0].ok
    assert res.iterations[0].reason
    assert res.iterations[1].ok
    assert res.iteration_thetas()[0] is None
    assert res.iteration_thetas()[1] is not None
    assert abs(res.theta_ch - np.pi / 4) < 1e-8


def test_run_all_iterations_failed():
    with pytest.raises(EstimationFailure):
        run(plane_problem(np.pi / 6), k=3, provider=StuckProvider())


def test_run_sampled_determinism_and_accounting():
    p = plane_problem(np.pi / 6)
    res = run(p, k=2, shots=100000, seed=3)
    again = run(p, k=2, shots=100000, seed=3)
    assert res.theta_ch == again.theta_ch
    assert [r.triplet for r in res.iterations] == [r.triplet for r in again.iterations]
    assert res.oracle_calls == 100000 * 24 * (1 + 2 + 4)
    assert abs(res.value - 0.75) < 0.02


def test_run_retry_accounting():
    # frozen instance where iteration 0 trips at 1x shots and clears on the
    # 4x retry while deeper iterations stay under the guard either way
    delta = np.deg2rad(42.0)
    p = plane_problem(delta)
    noise = NoiseSpec(kind="pauli")
    res = run(p, noise, k=2, shots=2000, seed=6, retry=True)
    assert res.iterations[0].retried and res.iterations[0].ok
    assert not res.iterations[1].ok and not res.iterations[2].ok
    base = 2000 * 24 * (1 + 2 + 4)
    extra = 2000 * 4 * 24 * (1 + 2 + 4)  # every iteration retried once
    assert res.oracle_calls == base + extra
    with pytest.raises(EstimationFailure):
        run(p, noise, k=2, shots=2000, seed=6, retry=False)


def test_run_monotone_refinement():
    """Noiseless exact iterations never move away from the true phase."""
    rng = np.random.default_rng(337)
    checked = 0
    while checked < 20:
        delta = rng.uniform(0.1, np.pi / 2 - 0.1)
        truth = 2.0 * fold_theta(2.0 * delta)
        res = run(plane_problem(delta), k=6)
        errs = [abs(rec.selected - truth) for rec in res.iterations if rec.ok]
        if len(errs) < 2:
            continue
        assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
        assert errs[-1] < 1e-6
        checked += 1


def test_perturbed_run_stays_close():
    res = run(plane_problem(np.pi / 6), k=4, perturbation=1e-3, seed=11)
    assert abs(res.theta_ch - 2 * np.pi / 3) < 1e-2
    assert res.oracle_calls == 0
