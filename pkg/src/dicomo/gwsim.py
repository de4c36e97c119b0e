"""Monte Carlo for Galton-Watson branching processes.

Run batches are split into fixed-size chunks, each owning a deterministically
derived RNG substream, so every estimate is bit-reproducible regardless of
how chunks are scheduled. Generation-level sums inside a chunk are drawn via
a multinomial split of the population over the (finite) offspring support,
which is distributionally identical to summing per-individual draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoExtinctRuns, NoSurvivors
from .theory import OffspringDistribution

DEFAULT_CAP = 10**6
# Populations at or above this stop being evolved and count as survivors:
# extinction from 10^5 individuals has probability below q^(10^5) for any
# subcritical-per-line q < 1, far beyond Monte Carlo resolution.
_FREEZE = 10**5
_CHUNK = 1 << 16


@dataclass(frozen=True)
class GWTrajectory:
    """One simulated trajectory of generation sizes X_0..X_T."""

    sizes: tuple[int, ...]
    total: int
    status: str  # "extinct" | "alive_at_horizon" | "size_censored"


def _seed_sequence(rng) -> np.random.SeedSequence:
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, (int, np.integer)):
        return np.random.SeedSequence(int(rng))
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(2**63)))
    raise DomainError(f"cannot derive a seed stream from {rng!r}")


def _chunk_rngs(rng, runs: int):
    """Deterministic per-chunk substreams keyed by chunk index."""
    base = _seed_sequence(rng)
    entropy = base.entropy
    n_chunks = (runs + _CHUNK - 1) // _CHUNK
    for i in range(n_chunks):
        size = min(_CHUNK, runs - i * _CHUNK)
        ss = np.random.SeedSequence(entropy=entropy, spawn_key=(i,))
        yield np.random.default_rng(ss), size


def _support_arrays(xi: OffspringDistribution):
    ks = np.array([k for k, _ in xi.pmf], dtype=np.int64)
    ps = np.array([p for _, p in xi.pmf], dtype=np.float64)
    ps = ps / ps.sum()
    return ks, ps


def _step(x: np.ndarray, ks: np.ndarray, ps: np.ndarray, rng) -> np.ndarray:
    """One generation for a vector of populations (multinomial split)."""
    if x.size == 0:
        return x
    counts = rng.multinomial(x, ps)
    return counts @ ks


def simulate(
    xi: OffspringDistribution,
    max_t: int,
    cap: int = DEFAULT_CAP,
    rng: np.random.Generator | int | None = None,
) -> GWTrajectory:
    """Exact forward simulation of one tree, individual-by-individual.

    Each generation is the sum of per-individual cdf inversions. Stops at
    extinction, at the horizon, or when the next generation would exceed
    `cap` (status "size_censored", the oversized generation is not recorded).
    """
    if max_t < 1:
        raise DomainError("need max_t >= 1")
    if cap < 1:
        raise DomainError("need cap >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    ks, ps = _support_arrays(xi)
    cdf = np.cumsum(ps)
    cdf[-1] = 1.0
    sizes = [1]
    x = 1
    status = "alive_at_horizon"
    for _ in range(max_t):
        draws = ks[np.searchsorted(cdf, rng.random(x), side="right")]
        x = int(draws.sum())
        if x > cap:
            status = "size_censored"
            break
        sizes.append(x)
        if x == 0:
            status = "extinct"
            break
    return GWTrajectory(tuple(sizes), sum(sizes), status)


def estimate_survival(
    xi: OffspringDistribution, horizon: int, runs: int, rng
) -> tuple[float, float]:
    """Fraction of runs with X_horizon > 0, with binomial standard error."""
    if runs < 1:
        raise DomainError("need runs >= 1")
    ks, ps = _support_arrays(xi)
    alive_total = 0
    for crng, size in _chunk_rngs(rng, runs):
        x = np.ones(size, dtype=np.int64)
        for _ in range(horizon):
            active = (x > 0) & (x < _FREEZE)
            if not active.any():
                break
            x[active] = _step(x[active], ks, ps, crng)
        alive_total += int((x > 0).sum())
    est = alive_total / runs
    return est, math.sqrt(est * (1.0 - est) / runs)


def burn_in_time(xi: OffspringDistribution, omega: int) -> int:
    """ceil(log_nu omega): levels before the nu^t normalization passes omega."""
    if xi.mean <= 1.0:
        raise DomainError("burn-in time is defined for supercritical offspring")
    return math.ceil(math.log(omega) / math.log(xi.mean))


def thin_event_probability(
    xi: OffspringDistribution, omega: int, t: int, runs: int, rng
) -> tuple[float, float]:
    """Monte Carlo estimate of P(0 < X_r < omega for all r = 1..t).

    Runs are pruned as soon as they violate the event.
    """
    if omega < 2:
        raise DomainError("need omega >= 2")
    if t < 1:
        raise DomainError("need t >= 1")
    ks, ps = _support_arrays(xi)
    hits = 0
    for crng, size in _chunk_rngs(rng, runs):
        x = np.ones(size, dtype=np.int64)
        for _ in range(t):
            live = x > 0
            x = x[live]
            if x.size == 0:
                break
            x = _step(x, ks, ps, crng)
            x = x[x < omega]
        hits += int((x > 0).sum())
    est = hits / runs
    return est, math.sqrt(est * (1.0 - est) / runs)


def thin_event_indicators(
    xi: OffspringDistribution, omegas, t: int, runs: int, rng, cap: int = DEFAULT_CAP
) -> dict[int, np.ndarray]:
    """Per-run thin-event indicators for several widths on shared trajectories.

    All widths are evaluated on identical trajectories (populations frozen at
    `cap`), so the indicator is pointwise nondecreasing in omega. Censored
    populations count as violations for every omega <= cap.
    """
    omegas = sorted(int(w) for w in omegas)
    if omegas and omegas[0] < 2:
        raise DomainError("need omega >= 2")
    ks, ps = _support_arrays(xi)
    parts = {w: [] for w in omegas}
    for crng, size in _chunk_rngs(rng, runs):
        x = np.ones(size, dtype=np.int64)
        ok = {w: np.ones(size, dtype=bool) for w in omegas}
        for _ in range(t):
            grow = (x > 0) & (x < cap)
            x[grow] = _step(x[grow], ks, ps, crng)
            np.minimum(x, cap, out=x)
            for w in omegas:
                ok[w] &= (x > 0) & (x < w)
        for w in omegas:
            parts[w].append(ok[w])
    return {w: np.concatenate(parts[w]) for w in omegas}


def extinct_root_offspring_law(
    xi: OffspringDistribution, horizon: int, runs: int, rng
) -> OffspringDistribution:
    """Empirical root-offspring pmf among runs extinct by the horizon."""
    if survival_is_certain(xi):
        raise NoExtinctRuns("extinction is impossible for this offspring law")
    ks, ps = _support_arrays(xi)
    counts: dict[int, int] = {}
    total = 0
    for crng, size in _chunk_rngs(rng, runs):
        root = _step(np.ones(size, dtype=np.int64), ks, ps, crng)
        x = root.copy()
        for _ in range(horizon - 1):
            active = (x > 0) & (x < _FREEZE)
            if not active.any():
                break
            x[active] = _step(x[active], ks, ps, crng)
        extinct = x == 0
        total += int(extinct.sum())
        vals, cnt = np.unique(root[extinct], return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            counts[v] = counts.get(v, 0) + c
    if total == 0:
        raise NoExtinctRuns("every run survived the horizon")
    return OffspringDistribution.from_probs(
        {k: c / total for k, c in counts.items()}
    )


def survival_is_certain(xi: OffspringDistribution) -> bool:
    return xi.prob(0) == 0.0 and xi.prob(1) == 0.0


def subcritical_decay(
    xi: OffspringDistribution,
    t: int,
    runs: int,
    rng,
    total_size_bound: int | None = None,
) -> float:
    """(P-hat(X_t > 0))^(1/t) for a subcritical offspring law.

    With `total_size_bound` the event is intersected with Y_t <= bound,
    where Y_t is the total progeny through depth t.
    """
    if xi.mean >= 1.0:
        raise DomainError("subcritical decay requires mean < 1")
    if t < 1:
        raise DomainError("need t >= 1")
    ks, ps = _support_arrays(xi)
    hits = 0
    for crng, size in _chunk_rngs(rng, runs):
        x = np.ones(size, dtype=np.int64)
        y = np.ones(size, dtype=np.int64)
        for _ in range(t):
            live = x > 0
            x = x[live]
            y = y[live]
            if x.size == 0:
                break
            x = _step(x, ks, ps, crng)
            y = y + x
        if total_size_bound is not None:
            keep = (x > 0) & (y <= total_size_bound)
        else:
            keep = x > 0
        hits += int(keep.sum())
    if hits == 0:
        raise NoSurvivors(f"no run alive at depth {t} in {runs} runs")
    return (hits / runs) ** (1.0 / t)
