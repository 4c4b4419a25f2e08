import json
import pathlib

import numpy as np
import pytest

from cdmlfc.errors import ObjectiveFailure
from cdmlfc.wca import WcaConfig, assign_streams, initialize, minimize, step

BOX2 = [(-5.12, 5.12), (-5.12, 5.12)]


def sphere(x):
    return float(np.sum(x * x))


def rosenbrock(x):
    return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)


class TestConfig:
    def test_defaults_match_reference(self):
        cfg = WcaConfig()
        assert (cfg.n_pop, cfg.max_it, cfg.n_sr, cfg.d_max0) == (50, 50, 4, 1e-16)

    def test_rejects_bad_c(self):
        with pytest.raises(ValueError):
            WcaConfig(c=0.5)
        with pytest.raises(ValueError):
            WcaConfig(c=2.5)

    def test_rejects_small_population(self):
        with pytest.raises(ValueError):
            WcaConfig(n_pop=5, n_sr=4)


class TestAssignStreams:
    def test_equal_costs_default_split(self):
        assert assign_streams([1.0, 1.0, 1.0, 1.0], 46) == [12, 12, 11, 11]

    def test_two_parents_two_drops(self):
        assert assign_streams([1.0, 1.0], 2) == [1, 1]

    def test_postconditions_on_random_inputs(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n_sr = int(rng.integers(2, 7))
            drops = int(rng.integers(n_sr, 60))
            costs = rng.uniform(-5.0, 5.0, size=n_sr).tolist()
            for inverted in (False, True):
                counts = assign_streams(costs, drops, fitness_inverted=inverted)
                assert sum(counts) == drops
                assert min(counts) >= 1

    def test_all_zero_costs_fall_back_to_equal(self):
        assert assign_streams([0.0, 0.0, 0.0, 0.0], 46) == [12, 12, 11, 11]

    def test_inverted_gives_best_parent_most(self):
        counts = assign_streams([0.1, 5.0, 9.0], 30, fitness_inverted=True)
        assert counts[0] == max(counts)


class TestInitialize:
    def test_stream_count(self):
        state = initialize(sphere, BOX2, WcaConfig(seed=1))
        assert len(state.streams) == 46
        assert len(state.rivers) == 3
        assert len(state.assignments) == 46

    def test_bounds_respected(self):
        state = initialize(sphere, [(0.0, 1.0)], WcaConfig(seed=9))
        for cand in [state.sea] + state.rivers + state.streams:
            assert 0.0 <= cand.position[0] <= 1.0

    def test_identical_seeds_identical_states(self):
        s1 = initialize(sphere, BOX2, WcaConfig(seed=4))
        s2 = initialize(sphere, BOX2, WcaConfig(seed=4))
        assert np.array_equal(s1.sea.position, s2.sea.position)
        assert s1.population_costs == s2.population_costs
        assert s1.assignments == s2.assignments

    def test_sea_is_best(self):
        state = initialize(sphere, BOX2, WcaConfig(seed=5))
        assert state.sea.cost == min(state.population_costs)

    def test_objective_failure_after_retries(self):
        def bad(x):
            return float("nan")

        with pytest.raises(ObjectiveFailure):
            initialize(bad, BOX2, WcaConfig(seed=0))


class TestStep:
    def test_invariants_over_iterations(self):
        for seed in range(10):
            cfg = WcaConfig(seed=seed)
            state = initialize(sphere, BOX2, cfg)
            for _ in range(cfg.max_it):
                state = step(state, sphere, BOX2, cfg)
                costs = state.population_costs
                assert state.sea.cost == min(costs)
                assert len(state.streams) == cfg.n_pop - cfg.n_sr
                for cand in [state.sea] + state.rivers + state.streams:
                    assert np.all(cand.position >= -5.12) and np.all(cand.position <= 5.12)
            hist = state.history
            assert all(hist[i + 1] <= hist[i] for i in range(len(hist) - 1))

    def test_stationary_stream_at_parent(self):
        cfg = WcaConfig(seed=2)
        state = initialize(sphere, BOX2, cfg)
        state.streams[0].position = state.sea.position.copy()
        state.assignments[0] = 0
        nxt = step(state, sphere, BOX2, cfg)
        # zero displacement vector: the move leaves the position fixed
        assert np.allclose(nxt.streams[0].position, state.sea.position) or nxt.streams[0].cost <= state.sea.cost

    def test_dmax_decays_to_floor(self):
        cfg = WcaConfig(seed=0, max_it=3)
        state = initialize(sphere, BOX2, cfg)
        d0 = state.d_max
        state = step(state, sphere, BOX2, cfg)
        assert state.d_max == pytest.approx(d0 * (1 - 1 / 3))
        for _ in range(10):
            state = step(state, sphere, BOX2, cfg)
        assert state.d_max >= 0.0


class TestMinimize:
    def test_constant_objective(self):
        best, hist = minimize(lambda x: 7.5, BOX2, WcaConfig(seed=0))
        assert best.cost == 7.5
        assert hist == [7.5] * 51

    def test_sphere_benchmark(self):
        finals = []
        for seed in range(10):
            best, _ = minimize(sphere, BOX2, WcaConfig(seed=seed))
            finals.append(best.cost)
        assert float(np.median(finals)) < 1e-3

    def test_rosenbrock_benchmark(self):
        finals = []
        for seed in range(10):
            best, _ = minimize(rosenbrock, [(-2.048, 2.048)] * 2, WcaConfig(seed=seed))
            finals.append(best.cost)
        assert float(np.median(finals)) < 1e-1

    def test_bit_exact_reproducibility(self):
        b1, h1 = minimize(sphere, BOX2, WcaConfig(seed=11))
        b2, h2 = minimize(sphere, BOX2, WcaConfig(seed=11))
        assert h1 == h2
        assert np.array_equal(b1.position, b2.position)
        assert b1.cost == b2.cost

    def test_batch_objective_matches_pointwise(self):
        def batch(X):
            return np.sum(X * X, axis=1)

        b1, h1 = minimize(sphere, BOX2, WcaConfig(seed=6))
        b2, h2 = minimize(sphere, BOX2, WcaConfig(seed=6), batch_objective=batch)
        assert h1 == pytest.approx(h2, rel=1e-12)

    def test_raining_liveness_on_sphere(self):
        cfg = WcaConfig(seed=0, max_it=200)
        state = initialize(sphere, BOX2, cfg)
        for _ in range(cfg.max_it):
            state = step(state, sphere, BOX2, cfg)
        assert state.rain_events >= 1

    def test_pilot_record_is_current(self):
        rec = json.loads(
            (pathlib.Path(__file__).parent / "data" / "wca_pilot.json").read_text()
        )
        assert rec["sphere_2d"]["threshold"] == 1e-3
        assert rec["rosenbrock_2d"]["threshold"] == 1e-1
        assert rec["sphere_2d"]["median_final_cost"] < 1e-3
        assert rec["rosenbrock_2d"]["median_final_cost"] < 1e-1
