"""Random digraph construction.

Covers the uniform half-edge pairing of a bi-degree sequence, simple-graph
rejection, the lazy BFS edge-exploration that generates the pairing on
demand, and the derived d-out / binomial models.

Half-edge slot convention: tail slots (out half-edges) and head slots (in
half-edges) are numbered 0..m-1, grouped by vertex in vertex order. A
pairing is an array `perm` with tail slot i matched to head slot perm[i].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .degmodel import BiDegreeSequence
from .errors import AttemptsExhausted, DomainError, StartAlreadyPaired

UNDISCOVERED, ACTIVE, PAIRED, FATAL = 0, 1, 2, 3


@dataclass
class Digraph:
    """A directed multigraph with dual compressed adjacency.

    `pairing` (with `seq`) records the half-edge matching that produced the
    graph, when it came from a configuration-model pairing.
    """

    n: int
    src: np.ndarray
    tgt: np.ndarray
    simple_flag: bool = False
    seq: BiDegreeSequence | None = None
    pairing: np.ndarray | None = None
    attempts: int | None = None
    _out_csr: tuple | None = field(default=None, init=False, repr=False, compare=False)
    _in_csr: tuple | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.src)

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n).astype(np.int64)

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.tgt, minlength=self.n).astype(np.int64)

    def out_csr(self):
        """(indptr, targets): targets of each vertex, grouped by source."""
        if self._out_csr is None:
            order = np.argsort(self.src, kind="stable")
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.src, minlength=self.n), out=indptr[1:])
            self._out_csr = (indptr, self.tgt[order].astype(np.int64))
        return self._out_csr

    def in_csr(self):
        """(indptr, sources): sources of each vertex, grouped by target."""
        if self._in_csr is None:
            order = np.argsort(self.tgt, kind="stable")
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.tgt, minlength=self.n), out=indptr[1:])
            self._in_csr = (indptr, self.src[order].astype(np.int64))
        return self._in_csr

    def half_edge_pairing(self):
        """(tail_owner, head_owner, tail_to_head) realizing this multigraph.

        Uses the generating pairing when available, otherwise a canonical one
        derived from the edge list (edge order within a vertex group).
        """
        if self.seq is not None and self.pairing is not None:
            tail_owner, head_owner = half_edge_owners(self.seq)
            return tail_owner, head_owner, self.pairing.astype(np.int64)
        tail_owner = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees())
        head_owner = np.repeat(np.arange(self.n, dtype=np.int64), self.in_degrees())
        by_src = np.argsort(self.src, kind="stable")  # tail slot j -> edge
        by_tgt = np.argsort(self.tgt, kind="stable")  # head slot i -> edge
        edge_to_head = np.empty(self.m, dtype=np.int64)
        edge_to_head[by_tgt] = np.arange(self.m)
        return tail_owner, head_owner, edge_to_head[by_src]


@lru_cache(maxsize=64)
def half_edge_owners(seq: BiDegreeSequence):
    """Owner vertex of each tail slot and head slot (cached; do not mutate)."""
    verts = np.arange(seq.n, dtype=np.int64)
    return np.repeat(verts, seq.d_out()), np.repeat(verts, seq.d_in())


def digraph_from_pairing(seq: BiDegreeSequence, perm: np.ndarray) -> Digraph:
    tail_owner, head_owner = half_edge_owners(seq)
    return Digraph(
        n=seq.n,
        src=tail_owner,
        tgt=head_owner[perm],
        seq=seq,
        pairing=np.asarray(perm, dtype=np.int64),
    )


def pair_uniform(seq: BiDegreeSequence, rng: np.random.Generator) -> Digraph:
    """Uniformly random perfect matching of tails to heads (full shuffle)."""
    return digraph_from_pairing(seq, rng.permutation(seq.m))


def is_simple(g: Digraph) -> bool:
    if g.m == 0:
        return True
    if np.any(g.src == g.tgt):
        return False
    keys = g.src.astype(np.int64) * g.n + g.tgt
    return len(np.unique(keys)) == g.m


def sample_simple(
    seq: BiDegreeSequence, rng: np.random.Generator, max_attempts: int = 1000
) -> Digraph:
    """Rejection-sample a uniform simple digraph with the given degrees."""
    for attempt in range(1, max_attempts + 1):
        g = pair_uniform(seq, rng)
        if is_simple(g):
            g.simple_flag = True
            g.attempts = attempt
            return g
    raise AttemptsExhausted(max_attempts)


# -- lazy exploration ------------------------------------------------------


class ExplorationState:
    """Mutable record of a (possibly partial) on-demand pairing.

    Half-edge statuses partition {undiscovered, active, paired, fatal};
    `tree`, `level_sizes`, `epoch_steps` and `outcome` describe the most
    recent exploration run on this state. Between runs, every unpaired
    half-edge incident to a previously visited vertex turns fatal, which is
    exactly conditioning on the accumulated partial pairing.
    """

    def __init__(self, seq: BiDegreeSequence):
        self.seq = seq
        m = seq.m
        tail_owner: list[int] = []
        head_owner: list[int] = []
        tail_range: list[tuple[int, int]] = []
        head_range: list[tuple[int, int]] = []
        t = h = 0
        for v, (k, ell) in enumerate(seq.pairs):
            tail_range.append((t, t + ell))
            tail_owner.extend([v] * ell)
            t += ell
            head_range.append((h, h + k))
            head_owner.extend([v] * k)
            h += k
        self.tail_owner = tail_owner
        self.head_owner = head_owner
        self.tail_range = tail_range
        self.head_range = head_range
        self.tail_status = [UNDISCOVERED] * m
        self.head_status = [UNDISCOVERED] * m
        self.tail_to_head = [-1] * m
        self.head_to_tail = [-1] * m
        self.tail_pool = list(range(m))
        self.head_pool = list(range(m))
        self.tail_pos = list(range(m))
        self.head_pos = list(range(m))
        self.discovered = [False] * seq.n
        # per-run outputs
        self.tree_slot: list[int] = []
        self.tree_parent: list[int] = []
        self.tree_depth: list[int] = []
        self.level_sizes: list[int] = []
        self.epoch_steps: list[int] = []
        self.steps = 0
        self.outcome: str | None = None
        self.start: int | None = None
        self.direction: str | None = None

    def clone(self) -> "ExplorationState":
        new = ExplorationState.__new__(ExplorationState)
        new.seq = self.seq
        for name, val in self.__dict__.items():
            if name == "seq":
                continue
            new.__dict__[name] = list(val) if isinstance(val, list) else val
        return new

    def pairing_count(self) -> int:
        return sum(1 for h in self.tail_to_head if h >= 0)

    def paired_tails(self) -> list[int]:
        return [t for t, h in enumerate(self.tail_to_head) if h >= 0]

    def tree_labels(self) -> list[str]:
        """'paired' or 'active' per tree node of the last run."""
        status = self.tail_status if self.direction == "out" else self.head_status
        return ["paired" if status[s] == PAIRED else "active" for s in self.tree_slot]


def _remove_from_pool(pool, pos, slot):
    i = pos[slot]
    last = pool[-1]
    pool[i] = last
    pos[last] = i
    pool.pop()
    pos[slot] = -1


def _record_pair(state: ExplorationState, tail: int, head: int):
    state.tail_status[tail] = PAIRED
    state.head_status[head] = PAIRED
    state.tail_to_head[tail] = head
    state.head_to_tail[head] = tail
    _remove_from_pool(state.tail_pool, state.tail_pos, tail)
    _remove_from_pool(state.head_pool, state.head_pos, head)
    state.steps += 1


def _explore(state, start, direction, max_depth, omega, draw_partner, forbidden):
    seq = state.seq
    if direction == "out":
        my_status, partner_status = state.tail_status, state.head_status
        my_owner, partner_owner = state.tail_owner, state.head_owner
        my_range, partner_range = state.tail_range, state.head_range
    else:
        my_status, partner_status = state.head_status, state.tail_status
        my_owner, partner_owner = state.head_owner, state.tail_owner
        my_range, partner_range = state.head_range, state.tail_range

    # condition on everything explored so far: unpaired half-edges of
    # visited vertices become fatal
    for slots, owners in (
        (state.tail_status, state.tail_owner),
        (state.head_status, state.head_owner),
    ):
        for i, st in enumerate(slots):
            if st != PAIRED and state.discovered[owners[i]]:
                slots[i] = FATAL
    for h in forbidden:
        if partner_status[h] != PAIRED:
            partner_status[h] = FATAL

    if not 0 <= start < seq.m:
        raise DomainError(f"start slot {start} outside [0, {seq.m})")
    if my_status[start] in (PAIRED, FATAL):
        raise StartAlreadyPaired(f"start slot {start} is unavailable in this state")

    v0 = my_owner[start]
    state.discovered[v0] = True
    my_status[start] = ACTIVE
    lo, hi = partner_range[v0]
    for s in range(lo, hi):
        if partner_status[s] == UNDISCOVERED:
            partner_status[s] = ACTIVE

    state.tree_slot = [start]
    state.tree_parent = [-1]
    state.tree_depth = [0]
    state.level_sizes = [1]
    state.epoch_steps = []
    state.start = start
    state.direction = direction
    state.outcome = None

    current = [0]  # node indices of the frontier level
    depth = 0
    while True:
        next_level: list[int] = []
        for node in current:
            e = state.tree_slot[node]
            h = draw_partner(e)
            prev = partner_status[h]
            if direction == "out":
                _record_pair(state, e, h)
            else:
                _record_pair(state, h, e)
            if prev == FATAL:
                state.epoch_steps.append(state.steps)
                state.outcome = "fatal"
                return state
            if prev == UNDISCOVERED:
                v = partner_owner[h]
                state.discovered[v] = True
                plo, phi = partner_range[v]
                for s in range(plo, phi):
                    if partner_status[s] == UNDISCOVERED:
                        partner_status[s] = ACTIVE
                mlo, mhi = my_range[v]
                for s in range(mlo, mhi):
                    if my_status[s] == UNDISCOVERED:
                        my_status[s] = ACTIVE
                        state.tree_slot.append(s)
                        state.tree_parent.append(node)
                        state.tree_depth.append(depth + 1)
                        next_level.append(len(state.tree_slot) - 1)
        state.epoch_steps.append(state.steps)
        state.level_sizes.append(len(next_level))
        depth += 1
        if not next_level:
            state.outcome = "died"
            return state
        if omega is not None and len(next_level) >= omega:
            state.outcome = "width"
            return state
        if depth >= max_depth:
            state.outcome = "max_depth"
            return state
        current = next_level


def lazy_explore(
    seq: BiDegreeSequence,
    start: int,
    direction: str = "out",
    *,
    max_depth: int,
    omega: int | None = None,
    forbidden=(),
    rng: np.random.Generator,
    state: ExplorationState | None = None,
) -> ExplorationState:
    """BFS edge-exploration that generates the pairing on demand.

    Each pairing draws a uniform unpaired partner half-edge, so any event
    measurable from the explored region has the same law as under
    `pair_uniform`. A prior `state` is honored (and not mutated): its
    pairings stand and its visited vertices are fatal. Terminates when the
    frontier dies, a fatal half-edge is hit, `max_depth` is reached, or a
    level reaches width `omega`.
    """
    if direction not in ("out", "in"):
        raise DomainError(f"direction must be 'out' or 'in', got {direction!r}")
    if max_depth < 1:
        raise DomainError("need max_depth >= 1")
    if omega is not None and omega < 1:
        raise DomainError("need omega >= 1")
    st = state.clone() if state is not None else ExplorationState(seq)
    pool = st.head_pool if direction == "out" else st.tail_pool

    def draw(_slot):
        return pool[int(rng.integers(len(pool)))]

    return _explore(st, start, direction, max_depth, omega, draw, forbidden)


def replay_explore(
    g: Digraph,
    start: int,
    direction: str = "out",
    *,
    max_depth: int,
    omega: int | None = None,
) -> ExplorationState:
    """Deterministic replay of the exploration on a realized pairing."""
    if g.seq is not None:
        seq = g.seq
        _, _, tail_to_head = g.half_edge_pairing()
    else:
        from .degmodel import validate_sequence

        d_in = g.in_degrees()
        d_out = g.out_degrees()
        seq = validate_sequence(zip(d_in.tolist(), d_out.tolist()))
        _, _, tail_to_head = g.half_edge_pairing()
    st = ExplorationState(seq)
    head_to_tail = np.empty(seq.m, dtype=np.int64)
    head_to_tail[tail_to_head] = np.arange(seq.m)

    if direction == "out":
        draw = lambda e: int(tail_to_head[e])
    else:
        draw = lambda e: int(head_to_tail[e])
    return _explore(st, start, direction, max_depth, omega, draw, ())


# -- derived models --------------------------------------------------------


def d_out_model(n: int, d: int, rng: np.random.Generator) -> Digraph:
    """Every vertex gets d out-edges with i.i.d. uniform targets."""
    if n < 1 or d < 1:
        raise DomainError("need n >= 1 and d >= 1")
    src = np.repeat(np.arange(n, dtype=np.int64), d)
    tgt = rng.integers(0, n, n * d, dtype=np.int64)
    return Digraph(n=n, src=src, tgt=tgt)


_DENSE_LIMIT = 20_000


def binomial_digraph(
    n: int, p: float, variant: str = "independent", rng: np.random.Generator = None
) -> Digraph:
    """Binomial random digraph.

    "independent": each ordered pair gets an edge with probability p.
    "oriented": each unordered pair gets an undirected edge with probability
    2p, oriented by a fair coin (requires 2p <= 1). No self-loops either way.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p = {p} outside [0, 1]")
    if n < 1:
        raise DomainError("need n >= 1")
    if n > _DENSE_LIMIT:
        raise DomainError(f"binomial digraph limited to n <= {_DENSE_LIMIT}")
    if rng is None:
        rng = np.random.default_rng()
    if variant == "independent":
        adj = rng.random((n, n)) < p
        np.fill_diagonal(adj, False)
        src, tgt = np.nonzero(adj)
    elif variant == "oriented":
        if 2 * p > 1.0:
            raise DomainError(f"oriented variant needs 2p <= 1, got p = {p}")
        iu, ju = np.triu_indices(n, k=1)
        present = rng.random(len(iu)) < 2 * p
        flip = rng.random(len(iu)) < 0.5
        iu, ju, flip = iu[present], ju[present], flip[present]
        src = np.where(flip, ju, iu)
        tgt = np.where(flip, iu, ju)
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return Digraph(
        n=n, src=src.astype(np.int64), tgt=tgt.astype(np.int64), simple_flag=True
    )


# -- edge-list file format -------------------------------------------------


def write_edge_list(g: Digraph, path, seed=None) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={g.n} m={g.m} simple={str(g.simple_flag).lower()} seed={seed}\n")
        for u, v in zip(g.src.tolist(), g.tgt.tolist()):
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> Digraph:
    n = None
    simple = False
    src = []
    tgt = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("n="):
                        n = int(tok[2:])
                    elif tok.startswith("simple="):
                        simple = tok[7:] == "true"
                continue
            u, v = line.split()
            src.append(int(u))
            tgt.append(int(v))
    src = np.array(src, dtype=np.int64)
    tgt = np.array(tgt, dtype=np.int64)
    if n is None:
        n = int(max(src.max(initial=-1), tgt.max(initial=-1))) + 1
    return Digraph(n=n, src=src, tgt=tgt, simple_flag=simple)
