"""Water Cycle Algorithm: box-constrained global minimization.

Population hierarchy: the best candidate is the sea, the next n_sr - 1 are
rivers, the rest are streams permanently assigned to one parent (sea or a
river). Each iteration streams flow toward their parent and rivers toward
the sea; better children swap roles with their parents; rivers that close
to within d_max of the sea trigger re-raining of their streams.

Determinism contract: one generator seeded from config.seed drives every
draw in a fixed order, so identical (objective, bounds, config) reproduce
identical histories bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ObjectiveFailure

Objective = Callable[[np.ndarray], float]
BatchObjective = Callable[[np.ndarray], np.ndarray]

_INIT_RETRY_CAP = 20


@dataclass(frozen=True)
class WcaConfig:
    n_pop: int = 50
    max_it: int = 50
    n_sr: int = 4  # rivers + sea
    d_max0: float = 1e-16  # initial evaporation distance
    c: float = 2.0  # flow coefficient
    seed: int = 0
    fitness_inverted: bool = False  # merit-proportional stream allocation

    def __post_init__(self):
        if self.n_sr < 2:
            raise ValueError("n_sr must be >= 2 (a sea plus at least one river)")
        if self.n_pop - self.n_sr < self.n_sr:
            raise ValueError("n_pop - n_sr must be >= n_sr so every parent gets a stream")
        if not (1.0 < self.c <= 2.0):
            raise ValueError("flow coefficient c must satisfy 1 < c <= 2")
        if not self.d_max0 > 0.0:
            raise ValueError("d_max0 must be > 0")
        if self.max_it < 1:
            raise ValueError("max_it must be >= 1")


@dataclass
class Candidate:
    position: np.ndarray
    cost: float

    def copy(self) -> "Candidate":
        return Candidate(self.position.copy(), self.cost)


@dataclass
class WcaState:
    sea: Candidate
    rivers: list[Candidate]
    streams: list[Candidate]
    assignments: list[int]  # per stream: 0 = sea, i >= 1 = rivers[i-1]
    d_max: float
    iteration: int
    history: list[float] = field(default_factory=list)
    rain_events: int = 0

    @property
    def population_costs(self) -> list[float]:
        return [self.sea.cost] + [r.cost for r in self.rivers] + [s.cost for s in self.streams]


def _as_bounds(bounds: Sequence[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(bounds, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise ValueError("bounds must be a sequence of (low, high) pairs")
    lb, ub = arr[:, 0], arr[:, 1]
    if not np.all(lb < ub):
        raise ValueError("each lower bound must be < its upper bound")
    return lb, ub


def _evaluate(
    objective: Objective,
    positions: np.ndarray,
    batch_objective: Optional[BatchObjective],
) -> np.ndarray:
    if positions.shape[0] == 0:
        return np.zeros(0)
    if batch_objective is not None:
        costs = np.asarray(batch_objective(positions), dtype=float)
    else:
        costs = np.array([float(objective(p)) for p in positions], dtype=float)
    if costs.shape != (positions.shape[0],):
        raise ValueError("objective returned a mis-shaped cost vector")
    return costs


def assign_streams(costs: Sequence[float], n_raindrops: int, fitness_inverted: bool = False) -> list[int]:
    """Stream counts per parent (sea first), repaired to sum exactly.

    Literal allocation is |cost_n| / sum|cost_i| as printed; the inverted
    variant allocates by merit rank (best parent heaviest). Shares are
    rounded half-up, zero counts bumped to one, then a deficit is handed out
    starting at the sea and an excess collected starting from the last
    river, never dropping a parent below one stream.
    """
    n_sr = len(costs)
    if n_raindrops < n_sr:
        raise ValueError("need at least one raindrop per parent")
    costs = [float(c) for c in costs]
    if fitness_inverted:
        order = sorted(range(n_sr), key=lambda i: costs[i])
        weights = [0.0] * n_sr
        for rank, i in enumerate(order):
            weights[i] = float(n_sr - rank)
    else:
        weights = [abs(c) for c in costs]
    total = sum(weights)
    if total == 0.0:
        quotas = [n_raindrops / n_sr] * n_sr
    else:
        quotas = [w / total * n_raindrops for w in weights]
    counts = [max(1, math.floor(q + 0.5)) for q in quotas]
    diff = n_raindrops - sum(counts)
    i = 0
    while diff > 0:
        counts[i % n_sr] += 1
        diff -= 1
        i += 1
    i = 0
    while diff < 0:
        j = n_sr - 1 - (i % n_sr)
        if counts[j] > 1:
            counts[j] -= 1
            diff += 1
        i += 1
    return counts


def initialize(
    objective: Objective,
    bounds: Sequence[Sequence[float]],
    config: WcaConfig,
    batch_objective: Optional[BatchObjective] = None,
) -> WcaState:
    """Rain the initial population and build the sea/river/stream hierarchy."""
    lb, ub = _as_bounds(bounds)
    rng = np.random.default_rng(config.seed)
    positions = lb + rng.random((config.n_pop, lb.size)) * (ub - lb)
    costs = _evaluate(objective, positions, batch_objective)
    for i in range(config.n_pop):
        retries = 0
        while not math.isfinite(costs[i]):
            if retries >= _INIT_RETRY_CAP:
                raise ObjectiveFailure(f"non-finite cost at initialization (candidate {i})")
            positions[i] = lb + rng.random(lb.size) * (ub - lb)
            costs[i] = _evaluate(objective, positions[i : i + 1], batch_objective)[0]
            retries += 1

    order = np.argsort(costs, kind="stable")
    ranked = [Candidate(positions[j].copy(), float(costs[j])) for j in order]
    sea = ranked[0]
    rivers = ranked[1 : config.n_sr]
    streams = ranked[config.n_sr :]

    counts = assign_streams(
        [sea.cost] + [r.cost for r in rivers],
        len(streams),
        fitness_inverted=config.fitness_inverted,
    )
    assignments: list[int] = []
    for parent, k in enumerate(counts):
        assignments.extend([parent] * k)

    state = WcaState(
        sea=sea,
        rivers=rivers,
        streams=streams,
        assignments=assignments,
        d_max=config.d_max0,
        iteration=0,
        history=[sea.cost],
    )
    # step() continues this generator; stash it on the state
    state._rng = rng  # type: ignore[attr-defined]
    return state


def _parent_of(state: WcaState, idx: int) -> Candidate:
    a = state.assignments[idx]
    return state.sea if a == 0 else state.rivers[a - 1]


def step(
    state: WcaState,
    objective: Objective,
    bounds: Sequence[Sequence[float]],
    config: WcaConfig,
    batch_objective: Optional[BatchObjective] = None,
) -> WcaState:
    """Advance one iteration: flow, promote, evaporate/rain, decay d_max."""
    lb, ub = _as_bounds(bounds)
    rng = getattr(state, "_rng", None)
    if rng is None:
        rng = np.random.default_rng(config.seed + state.iteration + 1)

    sea = state.sea.copy()
    rivers = [r.copy() for r in state.rivers]
    streams = [s.copy() for s in state.streams]
    assignments = list(state.assignments)

    # flow toward parents (fresh rand per component), then clamp
    moved = []
    for i, s in enumerate(streams):
        a = assignments[i]
        target = sea.position if a == 0 else rivers[a - 1].position
        s.position = s.position + rng.random(lb.size) * config.c * (target - s.position)
        np.clip(s.position, lb, ub, out=s.position)
        moved.append(s.position)
    for r in rivers:
        r.position = r.position + rng.random(lb.size) * config.c * (sea.position - r.position)
        np.clip(r.position, lb, ub, out=r.position)
        moved.append(r.position)

    costs = _evaluate(objective, np.asarray(moved), batch_objective)
    if not np.all(np.isfinite(costs)):
        raise ObjectiveFailure(f"non-finite cost at iteration {state.iteration + 1}")
    for i, s in enumerate(streams):
        s.cost = float(costs[i])
    for j, r in enumerate(rivers):
        r.cost = float(costs[len(streams) + j])

    # promotions: stream <-> parent, then rivers <-> sea
    for i, s in enumerate(streams):
        a = assignments[i]
        parent = sea if a == 0 else rivers[a - 1]
        if s.cost < parent.cost:
            s.position, parent.position = parent.position, s.position
            s.cost, parent.cost = parent.cost, s.cost
    for r in rivers:
        if r.cost < sea.cost:
            r.position, sea.position = sea.position, r.position
            r.cost, sea.cost = sea.cost, r.cost

    # evaporation: rivers within d_max of the sea re-rain their streams
    rain_events = state.rain_events
    for j, r in enumerate(rivers):
        if float(np.linalg.norm(sea.position - r.position)) < state.d_max:
            member_idx = [i for i, a in enumerate(assignments) if a == j + 1]
            if not member_idx:
                continue
            rain_events += 1
            fresh = lb + rng.random((len(member_idx), lb.size)) * (ub - lb)
            fresh_costs = _evaluate(objective, fresh, batch_objective)
            if not np.all(np.isfinite(fresh_costs)):
                raise ObjectiveFailure(f"non-finite cost after raining at iteration {state.iteration + 1}")
            for k, i in enumerate(member_idx):
                streams[i].position = fresh[k]
                streams[i].cost = float(fresh_costs[k])

    # keep the sea the population best even right after raining
    best = min(range(len(streams)), key=lambda i: streams[i].cost, default=None)
    if best is not None and streams[best].cost < sea.cost:
        streams[best].position, sea.position = sea.position, streams[best].position
        streams[best].cost, sea.cost = sea.cost, streams[best].cost

    d_max = state.d_max - state.d_max / config.max_it
    if d_max < 0.0:
        d_max = 0.0

    new_state = WcaState(
        sea=sea,
        rivers=rivers,
        streams=streams,
        assignments=assignments,
        d_max=d_max,
        iteration=state.iteration + 1,
        history=state.history + [sea.cost],
        rain_events=rain_events,
    )
    new_state._rng = rng  # type: ignore[attr-defined]
    return new_state


def minimize(
    objective: Objective,
    bounds: Sequence[Sequence[float]],
    config: WcaConfig,
    batch_objective: Optional[BatchObjective] = None,
) -> tuple[Candidate, list[float]]:
    """Run max_it iterations; return the sea and the best-cost history.

    history[k] is the best cost after k iterations (k = 0 is the initial
    population best), length max_it + 1.
    """
    state = initialize(objective, bounds, config, batch_objective)
    for _ in range(config.max_it):
        state = step(state, objective, bounds, config, batch_objective)
    return state.sea.copy(), list(state.history)


def random_search(
    objective: Objective,
    bounds: Sequence[Sequence[float]],
    config: WcaConfig,
    batch_objective: Optional[BatchObjective] = None,
) -> tuple[Candidate, list[float]]:
    """Seeded uniform random search with the same evaluation budget.

    Sanity baseline standing in for the out-of-scope GA/PSO comparisons:
    (max_it + 1) blocks of n_pop draws, history tracking the best-so-far
    after each block so profiles are comparable with minimize()'s.
    """
    lb, ub = _as_bounds(bounds)
    rng = np.random.default_rng(config.seed)
    best_pos: Optional[np.ndarray] = None
    best_cost = math.inf
    history: list[float] = []
    for _ in range(config.max_it + 1):
        positions = lb + rng.random((config.n_pop, lb.size)) * (ub - lb)
        costs = _evaluate(objective, positions, batch_objective)
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost = float(costs[i])
            best_pos = positions[i].copy()
        history.append(best_cost)
    return Candidate(best_pos, best_cost), history
