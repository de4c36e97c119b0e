"""Distances, exact diameters, neighbourhood profiles and path counts.

Distance semantics are vertex-to-vertex hop counts; parallel edges collapse.
The exact diameter is all-sources BFS with a deterministic reduction, so the
result (including the argmax pair) is independent of the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .degmodel import BiDegreeSequence, SequenceStats
from .errors import DomainError, IndexOutOfRange, InstanceTooLarge, SelfCheckFailed
from .graphgen import Digraph, ExplorationState, lazy_explore, replay_explore


@dataclass(frozen=True)
class DistanceReport:
    """Exact diameter of a digraph with its witness pair.

    `argmax` is None only for graphs where no ordered pair (i, j), i != j,
    is connected; the diameter is 0 then by convention.
    """

    diameter: int
    argmax: tuple[int, int] | None
    finite_pair_count: int
    n: int
    m: int


@dataclass(frozen=True)
class NeighborhoodProfile:
    """Level sizes |N_t| of one edge-neighbourhood exploration."""

    start: int
    direction: str
    sizes: tuple[int, ...]
    expansion_time: int | None
    died_at: int | None
    omega: int


@dataclass(frozen=True)
class ThinDepthScan:
    """Aggregate of repeated fresh-state neighbourhood probes."""

    max_thin_depth: int
    expansion_hist: dict
    death_hist: dict
    probes: int
    omega: int


def _csr(g: Digraph, direction: str):
    if direction == "out":
        return g.out_csr()
    if direction == "in":
        return g.in_csr()
    raise DomainError(f"direction must be 'out' or 'in', got {direction!r}")


def bfs_distances(g: Digraph, source: int, direction: str = "out") -> np.ndarray:
    """Hop distances from `source` along the given orientation; -1 = unreachable."""
    if not 0 <= source < g.n:
        raise IndexOutOfRange(f"source {source} outside [0, {g.n})")
    indptr, nbrs = _csr(g, direction)
    return _kernels.bfs_single(indptr, nbrs, g.n, source)


def diameter_exact(g: Digraph, threads: int = 1) -> DistanceReport:
    """Max finite distance over ordered pairs i != j, by all-sources BFS.

    Batches of sources run independently (optionally on a thread pool); the
    batch results are combined in batch order, so the reported argmax pair is
    the lexicographically smallest witness regardless of the thread count.
    """
    if g.n < 1:
        raise DomainError("need n >= 1")
    indptr, nbrs = g.out_csr()
    n = g.n
    starts = list(range(0, n, _kernels.BATCH))
    sources = [np.arange(s, min(s + _kernels.BATCH, n), dtype=np.int64) for s in starts]

    def work(src):
        return _kernels.bfs_batch(indptr, nbrs, n, src)

    if threads > 1 and len(sources) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, sources))
    else:
        results = [work(src) for src in sources]

    diameter = 0
    argmax = None
    finite = 0
    for level, fin, bs, bt in results:
        finite += int(fin)
        if level > diameter:
            diameter = int(level)
            argmax = (int(bs), int(bt))
    if argmax is not None:
        check = _kernels.bfs_pair(indptr, nbrs, n, argmax[0], argmax[1])
        if int(check) != diameter:
            raise SelfCheckFailed(
                f"dist{argmax} recomputed as {check}, expected {diameter}"
            )
    return DistanceReport(
        diameter=diameter, argmax=argmax, finite_pair_count=finite, n=n, m=g.m
    )


def typical_distance_sample(g: Digraph, pairs: int, rng: np.random.Generator):
    """Distances between i.i.d. uniform ordered vertex pairs.

    Returns (finite-distance subsample as an array, finite fraction). The
    pair (u, u) is allowed and contributes distance 0.
    """
    if pairs < 1:
        raise DomainError("need pairs >= 1")
    indptr, nbrs = g.out_csr()
    us = rng.integers(0, g.n, pairs)
    vs = rng.integers(0, g.n, pairs)
    dists = [
        int(_kernels.bfs_pair(indptr, nbrs, g.n, int(u), int(v)))
        for u, v in zip(us, vs)
    ]
    finite = np.array([d for d in dists if d >= 0], dtype=np.int64)
    return finite, len(finite) / pairs


def _profile_from_state(state: ExplorationState, omega: int) -> NeighborhoodProfile:
    sizes = tuple(state.level_sizes)
    died_at = None
    expansion_time = None
    for t, s in enumerate(sizes):
        if s == 0:
            died_at = t
            break
        if t >= 1 and s >= omega:
            expansion_time = t
            break
    return NeighborhoodProfile(
        start=state.start,
        direction=state.direction,
        sizes=sizes,
        expansion_time=expansion_time,
        died_at=died_at,
        omega=omega,
    )


def neighborhood_profile(
    obj,
    start: int,
    direction: str = "out",
    *,
    omega: int,
    max_t: int,
    rng: np.random.Generator | None = None,
) -> NeighborhoodProfile:
    """|N_t| per level from a half-edge, out of a sequence or a digraph.

    On a BiDegreeSequence the pairing is generated lazily (rng required); on
    a Digraph the realized pairing is replayed deterministically, so both
    modes agree on a shared pairing.
    """
    if omega < 1:
        raise DomainError("need omega >= 1")
    if isinstance(obj, BiDegreeSequence):
        if rng is None:
            raise DomainError("sequence mode needs an rng")
        state = lazy_explore(
            obj, start, direction, max_depth=max_t, omega=omega, rng=rng
        )
    elif isinstance(obj, Digraph):
        state = replay_explore(obj, start, direction, max_depth=max_t, omega=omega)
    else:
        raise DomainError(f"expected a sequence or digraph, got {type(obj).__name__}")
    return _profile_from_state(state, omega)


def thin_depth_scan(
    seq: BiDegreeSequence,
    direction: str = "out",
    *,
    omega: int,
    rng: np.random.Generator,
    budget: int,
    max_t: int | None = None,
) -> ThinDepthScan:
    """Probe half-edges with fresh lazy explorations; track thin survival.

    A probe is "thin to depth t" when 0 < |N_r| < omega for r = 1..t. Each
    probe starts from the next slot with a fresh state, so probes are i.i.d.
    `budget` caps the total number of pairings drawn across probes.
    """
    if budget < 1:
        raise DomainError("need budget >= 1")
    if max_t is None:
        max_t = max(4, 4 * math.ceil(math.log(seq.m + 1)))
    expansion_hist: dict[int, int] = {}
    death_hist: dict[int, int] = {}
    max_thin = 0
    probes = 0
    spent = 0
    slots = seq.m
    for start in range(slots):
        if spent >= budget:
            break
        state = lazy_explore(
            seq, start, direction, max_depth=max_t, omega=omega, rng=rng
        )
        spent += state.steps
        probes += 1
        prof = _profile_from_state(state, omega)
        if prof.expansion_time is not None:
            t = prof.expansion_time
            expansion_hist[t] = expansion_hist.get(t, 0) + 1
            thin = t - 1
        elif prof.died_at is not None:
            d = prof.died_at
            death_hist[d] = death_hist.get(d, 0) + 1
            thin = d - 1
        else:
            thin = len(prof.sizes) - 1
        if thin > max_thin:
            max_thin = thin
    return ThinDepthScan(
        max_thin_depth=max_thin,
        expansion_hist=expansion_hist,
        death_hist=death_hist,
        probes=probes,
        omega=omega,
    )


def expected_path_bound(
    stats: SequenceStats, x_plus: int, x_minus: int, s: int, k: int, r: int
) -> float:
    """Upper bound on the expected number of length-k simple directed paths.

    nu^(k-1) |X+||X-| / (m-k-s+1) * prod_{i=0}^{k-2} (1-i/r) / (1-(i+s)/m),
    with the empty product equal to 1.
    """
    m = stats.m
    if not 1 <= k <= r + 1:
        raise DomainError(f"need 1 <= k <= r+1, got k={k}, r={r}")
    if m - k - s + 1 <= 0:
        raise DomainError(f"need m - k - s + 1 > 0 (m={m}, k={k}, s={s})")
    nu = float(stats.nu_n)
    value = nu ** (k - 1) * x_plus * x_minus / (m - k - s + 1)
    for i in range(k - 1):
        value *= (1.0 - i / r) / (1.0 - (i + s) / m)
    return value


def count_simple_paths(
    g: Digraph, x_plus, x_minus, allowed, k_max: int
) -> dict[int, int]:
    """Exact simple directed path counts per length, at half-edge resolution.

    A length-k path is a tail in `x_plus` whose pairing chain passes through
    k-1 distinct intermediate vertices of `allowed` (one in- and one
    out-half-edge each, every combination counted) and ends at a head in
    `x_minus`. Exhaustive DFS, guarded to small instances.
    """
    if k_max < 1:
        raise DomainError("need k_max >= 1")
    if g.n > 64 and k_max > 4:
        raise InstanceTooLarge(
            f"exhaustive counting guarded to n <= 64 or k_max <= 4 (n={g.n}, k_max={k_max})"
        )
    tail_owner, head_owner, tail_to_head = g.half_edge_pairing()
    x_plus = set(int(t) for t in x_plus)
    x_minus = set(int(h) for h in x_minus)
    allowed = set(int(v) for v in allowed)
    for t in x_plus:
        if not 0 <= t < g.m:
            raise IndexOutOfRange(f"tail slot {t} outside [0, {g.m})")
    for h in x_minus:
        if not 0 <= h < g.m:
            raise IndexOutOfRange(f"head slot {h} outside [0, {g.m})")
    tails_of: dict[int, list[int]] = {}
    for t in range(g.m):
        tails_of.setdefault(int(tail_owner[t]), []).append(t)
    counts = {k: 0 for k in range(1, k_max + 1)}
    used: set[int] = set()

    def extend(head: int, depth: int):
        if head in x_minus:
            counts[depth] += 1
        if depth == k_max:
            return
        v = int(head_owner[head])
        if v not in allowed or v in used:
            return
        used.add(v)
        for t in tails_of.get(v, ()):
            extend(int(tail_to_head[t]), depth + 1)
        used.remove(v)

    for t in x_plus:
        extend(int(tail_to_head[t]), 1)
    return counts
