"""Photon-source accounting for discrete-variable gate teleportation.

Everything is counted in single-photon sources.  A production round is
synchronous: a budget of ``n`` sources is split between the stages of a
route in the proportions the ideal-multiplexing expectation calls for, all
factories fire at once, successes are paired greedily and leftovers are
thrown away when the round ends (nothing is stored for a later round).
"""

from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

ROUTES = ("knill", "cluster_std", "cluster_adv")


@dataclass(frozen=True)
class FactorySpec:
    photons_per_attempt: int
    success_prob: Fraction
    photons_out: int = 0  # photons carried by the heralded output

    def __post_init__(self):
        if not 0 < self.success_prob <= 1:
            raise ValueError(f"success probability must lie in (0, 1], got {self.success_prob}")

    @property
    def expected_cost(self) -> Fraction:
        return self.photons_per_attempt / self.success_prob


BELL = FactorySpec(4, Fraction(3, 16), 2)
GHZ3 = FactorySpec(6, Fraction(1, 32), 3)
KNILL_CSIGN = FactorySpec(2, Fraction(2, 27), 0)   # two ancilla photons on top of two Bell pairs
STANDARD_BM = FactorySpec(0, Fraction(1, 2), 0)
ADVANCED_BM = FactorySpec(4, Fraction(3, 4), 0)


def _route_parts(route: str):
    """(photons per attempt, photons spent on inputs) for the final stage of a route."""
    if route == "knill":
        return KNILL_CSIGN, 2 * BELL.expected_cost
    if route == "cluster_std":
        return STANDARD_BM, 2 * GHZ3.expected_cost
    if route == "cluster_adv":
        return ADVANCED_BM, 2 * GHZ3.expected_cost
    raise ValueError(f"unknown route {route!r}; expected one of {ROUTES}")


def expected_cost_res_state(route: str) -> Fraction:
    """Mean sources per |res> under ideal multiplexing.

    knill: (27/2)*2 + (27/2)*2*(16/3)*4 = 603.  The cluster routes join two
    GHZ3 states (32*6 sources each) with a Bell measurement.
    """
    gate, inputs = _route_parts(route)
    return (gate.photons_per_attempt + inputs) / gate.success_prob


def dv_quality(p_resource: float, p_bm: float) -> float:
    """Q = p_resource * p_bm^2 (both teleportations must succeed)."""
    for p in (p_resource, p_bm):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probabilities must lie in [0, 1], got {p}")
    return p_resource * p_bm * p_bm


def ghz_join(size_j: int, size_k: int, bm_success: bool):
    """Size of the joined GHZ state, or None when the measurement fails."""
    if size_j < 2 or size_k < 2:
        raise ValueError("GHZ states need at least two qubits")
    return size_j + size_k - 2 if bm_success else None


def grice_cost_estimate(N: int) -> float:
    """Rough estimate 200 (8/3)^(N-1) of the sources for the largest ancilla."""
    if N <= 3:
        raise ValueError(f"the estimate holds for N > 3 only, got N = {N}")
    return 200.0 * (8.0 / 3.0) ** (N - 1)


def grice_p_bm(N: int, levels: int) -> float:
    """Bell-measurement success with ancilla levels 1..levels present.

    Level 1 is the Bell pair and level k >= 2 is GHZ_(2^k).  The full set
    gives 1 - 2^-N; losing only the top state still allows 1 - 2^-(N-1);
    anything less falls back to the standard 1/2.
    """
    if levels >= N - 1:
        return 1.0 - 2.0 ** -N
    if levels == N - 2:
        return 1.0 - 2.0 ** -(N - 1)
    return 0.5


def grice_depth(level: int) -> int:
    """Join depth at which a GHZ tree first covers ancilla ``level``.

    Joining two equal GHZ states of size s gives 2s - 2, so depth k holds
    2^k + 2 qubits starting from GHZ3.
    """
    if level == 1:
        return 0
    if level == 2:
        return 1
    return level


# --------------------------------------------------------------------------
# random streams


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream keyed by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = (self.master_seed % 2**64) | ((self.stream_id % 2**64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.master_seed, stream_id)


@dataclass
class PhotonLedger:
    """Where the sources of one round ended up."""

    injected: int = 0
    surviving: int = 0   # photons inside the states handed on
    detected: int = 0    # heralds and Bell-measurement detections
    lost: int = 0        # photons of failed or discarded states
    idle: int = 0        # sources the budget split could not use

    def balanced(self) -> bool:
        return bool(np.all(self.injected == self.surviving + self.detected + self.lost + self.idle))

    def __iadd__(self, other):
        for k in ("injected", "surviving", "detected", "lost", "idle"):
            setattr(self, k, getattr(self, k) + getattr(other, k))
        return self


def _binomial(rng, n, p):
    n = np.asarray(n, dtype=np.int64)
    return rng.binomial(n, p) if np.any(n > 0) else np.zeros_like(n)


def _fire(rng, attempts, spec: FactorySpec, ledger: PhotonLedger):
    """Run ``attempts`` factories; heralded photons counted as detected."""
    ok = _binomial(rng, attempts, float(spec.success_prob))
    ledger.detected += ok * (spec.photons_per_attempt - spec.photons_out)
    ledger.lost += (attempts - ok) * spec.photons_per_attempt
    return ok


def _split(n, share: Fraction):
    return (np.asarray(n, dtype=np.int64) * share.numerator) // share.denominator


@functools.lru_cache(maxsize=None)
def _round_setup(route: str):
    gate, _ = _route_parts(route)
    share = gate.photons_per_attempt / (expected_cost_res_state(route) * gate.success_prob)
    return gate, (BELL if route == "knill" else GHZ3), share


def res_round(route: str, n, rng):
    """One synchronous round with ``n`` sources; returns (#|res>, ledger).

    ``n`` may be an array of budgets, simulated side by side with one
    draw per stage from ``rng``.
    """
    n = np.asarray(n, dtype=np.int64)
    led = PhotonLedger(injected=n.copy())
    gate, factory, share = _round_setup(route)
    gate_budget = _split(n, share)
    factory_budget = n - gate_budget
    attempts = factory_budget // factory.photons_per_attempt
    led.idle += factory_budget - attempts * factory.photons_per_attempt
    ok = _fire(rng, attempts, factory, led)
    pairs = ok // 2
    led.lost += (ok - 2 * pairs) * factory.photons_out
    if gate.photons_per_attempt:
        runs = np.minimum(pairs, gate_budget // gate.photons_per_attempt)
    else:
        runs = pairs
    led.idle += gate_budget - runs * gate.photons_per_attempt
    led.lost += (pairs - runs) * 2 * factory.photons_out
    made = _binomial(rng, runs, float(gate.success_prob))
    if route == "knill":
        # the CSIGN keeps the four Bell photons and heralds on its ancillas
        led.surviving += made * 4
        led.detected += made * gate.photons_per_attempt
        led.lost += (runs - made) * (4 + gate.photons_per_attempt)
    else:
        out = ghz_join(3, 3, True)
        led.surviving += made * out
        led.detected += runs * (2 + gate.photons_per_attempt)
        led.lost += (runs - made) * out
    return made, led


GRICE_BM_SHARE = Fraction(ADVANCED_BM.photons_per_attempt,
                          ADVANCED_BM.photons_per_attempt + GHZ3.expected_cost)


def grice_round(N: int, n, rng):
    """One synchronous round building the ancilla set of a 1 - 2^-N measurement.

    GHZ3 successes are joined pairwise level by level (p = 3/4, four
    ancilla photons per join).  Before each join level the states that have
    just reached the depth an ancilla needs are diverted as by-products,
    largest ancilla first.  Returns the number K of consecutive ancilla
    levels 1..K present (K = N - 1 is the full set) and the ledger.
    """
    n = np.asarray(n, dtype=np.int64)
    led = PhotonLedger(injected=n.copy())
    if N <= 1:
        led.idle += n
        return np.zeros_like(n), led
    bm_budget = _split(n, GRICE_BM_SHARE)
    attempts = (n - bm_budget) // GHZ3.photons_per_attempt
    led.idle += n - bm_budget - attempts * GHZ3.photons_per_attempt
    cnt = _fire(rng, attempts, GHZ3, led)
    size = 3
    have = {lev: np.zeros(n.shape, dtype=bool) for lev in range(1, N)}
    top = grice_depth(N - 1)
    depth = 0
    while True:
        for lev in range(N - 1, 0, -1):
            if grice_depth(lev) != depth:
                continue
            keep = 2 if lev == 1 else 2 ** lev
            take = cnt > 0
            have[lev] |= take
            cnt = cnt - take
            led.surviving += take * keep
            led.detected += take * (size - keep)  # surplus qubits measured out
        if depth >= top:
            break
        joins = np.minimum(cnt // 2, bm_budget // ADVANCED_BM.photons_per_attempt)
        bm_budget = bm_budget - joins * ADVANCED_BM.photons_per_attempt
        led.lost += (cnt - 2 * joins) * size
        ok = _binomial(rng, joins, float(ADVANCED_BM.success_prob))
        new = ghz_join(size, size, True)
        led.detected += joins * (2 + ADVANCED_BM.photons_per_attempt)
        led.lost += (joins - ok) * new
        cnt, size, depth = ok, new, depth + 1
    led.lost += cnt * size
    led.idle += bm_budget
    K = np.zeros(n.shape, dtype=np.int64)
    run = np.ones(n.shape, dtype=bool)
    for lev in range(1, N):
        run &= have[lev]
        K += run
    return K, led


# --------------------------------------------------------------------------
# drivers


@dataclass
class ResourceCurve:
    """(n_sources, success_prob, stderr) samples of one route or N."""

    label: str
    n_sources: np.ndarray
    success_prob: np.ndarray
    stderr: np.ndarray
    trials: int
    master_seed: int
    extra: dict = field(default_factory=dict)

    def rows(self):
        for n, p, s in zip(self.n_sources, self.success_prob, self.stderr):
            yield self.label, int(n), float(p), float(s), self.trials, self.master_seed

    def first_reaching(self, target: float):
        """Smallest sampled n whose success probability reaches ``target``."""
        hit = np.flatnonzero(self.success_prob >= target)
        return int(self.n_sources[hit[0]]) if hit.size else None


def _map_trials(fn, trials: int, threads: int | None):
    """Apply fn(trial_index) in chunks; results come back in trial order."""
    threads = threads or os.cpu_count() or 1
    chunks = np.array_split(np.arange(trials), max(1, min(threads * 4, trials)))
    work = lambda idx: [fn(int(i)) for i in idx]
    if threads == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    return [r for p in parts for r in p]


def _grid(n_sources_grid) -> np.ndarray:
    g = np.asarray(list(n_sources_grid), dtype=np.int64)
    if np.any(g < 0):
        raise ValueError("source counts must be nonnegative")
    return g


def simulate_res_state_curve(route: str, n_sources_grid, trials: int, rng: RngStream,
                             threads: int | None = None) -> ResourceCurve:
    """Fraction of rounds producing at least one |res> at each budget."""
    if trials < 1:
        raise ValueError("need at least one trial")
    _route_parts(route)
    grid = _grid(n_sources_grid)

    def trial(i):
        gen = rng.spawn(i).generator()
        return res_round(route, grid, gen)[0] > 0

    hits = np.array(_map_trials(trial, trials, threads), dtype=float).reshape(trials, grid.size)
    p = hits.mean(axis=0)
    return ResourceCurve(route, grid, p, np.sqrt(p * (1 - p) / trials), trials, rng.master_seed)


def mean_cost_per_res(route: str, n: int, trials: int, rng: RngStream,
                      threads: int | None = None) -> float:
    """Sources spent per |res> produced, pooled over ``trials`` rounds of size n."""
    def trial(i):
        made, led = res_round(route, n, rng.spawn(i).generator())
        if not led.balanced():
            raise AssertionError(f"photon bookkeeping broken in trial {i}: {led}")
        return int(made)

    made = sum(_map_trials(trial, trials, threads))
    return n * trials / made if made else math.inf


def simulate_grice_cost(N: int, n_sources_grid, trials: int, rng: RngStream,
                        threads: int | None = None) -> ResourceCurve:
    """Mean achieved p_BM versus ancilla sources for the 1 - 2^-N scheme.

    ``extra['p_full']`` holds the fraction of rounds producing the full
    ancilla set.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if trials < 1:
        raise ValueError("need at least one trial")
    grid = _grid(n_sources_grid)

    def trial(i):
        gen = rng.spawn(i).generator()
        return grice_round(N, grid, gen)[0]

    K = np.array(_map_trials(trial, trials, threads)).reshape(trials, grid.size)
    p_bm = np.array([grice_p_bm(N, k) for k in range(N)])[K]
    full = (K >= N - 1).mean(axis=0)
    return ResourceCurve(f"N={N}", grid, p_bm.mean(axis=0),
                         p_bm.std(axis=0) / math.sqrt(trials), trials, rng.master_seed,
                         {"p_full": full})


def default_grice_grid(N: int, points: int = 41) -> np.ndarray:
    est = 200.0 * (8.0 / 3.0) ** (N - 1)
    return np.unique(np.round(np.linspace(1.0, 5.0, points) * est).astype(np.int64))


def grice_monte_carlo_cost(N: int, trials: int, rng: RngStream, grid=None,
                           threads: int | None = None):
    """Sources per full ancilla set: min over n of n / P_full(n).

    Returns (cost, n at the optimum, P_full there).  Repeating rounds of
    size n until one yields the full set costs n / P_full(n) on average.
    """
    grid = default_grice_grid(N) if grid is None else _grid(grid)
    curve = simulate_grice_cost(N, grid, trials, rng, threads)
    pf = curve.extra["p_full"]
    with np.errstate(divide="ignore"):
        cost = np.where(pf > 0, grid / np.where(pf > 0, pf, 1), np.inf)
    i = int(np.argmin(cost))
    return float(cost[i]), int(grid[i]), float(pf[i])
