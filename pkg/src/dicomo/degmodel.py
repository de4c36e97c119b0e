"""Bi-degree sequences and joint in/out-degree distributions.

Degree pairs are always ordered (in, out). All moment accumulations are done
with exact integer (or rational) arithmetic before any division, so the
reported statistics are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DomainError,
    EmptySequence,
    IndexOutOfRange,
    RepairBudgetExceeded,
    SumMismatch,
)

_PMF_TOL = 1e-12
_DEFAULT_TAIL_MASS = 1e-12
_REPAIR_FACTOR = 100


@dataclass(frozen=True)
class BiDegreeSequence:
    """A fixed per-vertex sequence of (in-degree, out-degree) pairs.

    Invariant: the in- and out-degree totals agree and equal `m`.
    """

    pairs: tuple[tuple[int, int], ...]
    n: int
    m: int

    def d_in(self) -> np.ndarray:
        return np.fromiter((p[0] for p in self.pairs), dtype=np.int64, count=self.n)

    def d_out(self) -> np.ndarray:
        return np.fromiter((p[1] for p in self.pairs), dtype=np.int64, count=self.n)

    def max_degree(self) -> int:
        return max((max(p) for p in self.pairs), default=0)


@dataclass(frozen=True)
class JointDegreeDistribution:
    """Finite (possibly truncated) pmf over (in, out) degree pairs.

    `truncation_mass` records the probability discarded when an
    infinite-support family was truncated; the kept mass is renormalized
    exactly once at construction.
    """

    support: tuple[tuple[tuple[int, int], float], ...]
    truncation_mass: float = 0.0

    def __post_init__(self):
        if not self.support:
            raise DomainError("empty support")
        total = 0.0
        for (k, ell), p in self.support:
            if k < 0 or ell < 0:
                raise DomainError(f"negative degree in support: ({k}, {ell})")
            if p < 0:
                raise DomainError(f"negative probability {p} at ({k}, {ell})")
            total += p
        if abs(total - 1.0) > _PMF_TOL:
            raise DomainError(f"support mass {total} not normalized")

    # -- factories ---------------------------------------------------------

    @staticmethod
    def table(entries, truncation_mass: float = 0.0) -> "JointDegreeDistribution":
        """Explicit pmf from [(k, ell, p), ...] entries; renormalizes once."""
        support = {}
        for k, ell, p in entries:
            support[(int(k), int(ell))] = support.get((int(k), int(ell)), 0.0) + float(p)
        total = sum(support.values())
        if total <= 0:
            raise DomainError("table has no probability mass")
        items = tuple(sorted((kl, p / total) for kl, p in support.items()))
        return JointDegreeDistribution(items, truncation_mass)

    @staticmethod
    def point(k: int, ell: int) -> "JointDegreeDistribution":
        return JointDegreeDistribution((((int(k), int(ell)), 1.0),))

    @staticmethod
    def product(pmf_in, pmf_out, truncation_mass: float = 0.0) -> "JointDegreeDistribution":
        """Independent product of two one-dimensional pmfs [(k, p), ...]."""
        entries = [
            (k, ell, pk * pl)
            for k, pk in pmf_in
            for ell, pl in pmf_out
        ]
        return JointDegreeDistribution.table(entries, truncation_mass)

    @staticmethod
    def poisson_product(
        mu_in: float, mu_out: float, tail_mass: float = _DEFAULT_TAIL_MASS
    ) -> "JointDegreeDistribution":
        """Independent Poisson(mu_in) x Poisson(mu_out), tails truncated."""
        pin, min_lost = _truncated_poisson(mu_in, tail_mass / 2)
        pout, mout_lost = _truncated_poisson(mu_out, tail_mass / 2)
        lost = 1.0 - (1.0 - min_lost) * (1.0 - mout_lost)
        return JointDegreeDistribution.product(pin, pout, truncation_mass=lost)

    @staticmethod
    def powerlaw_product(
        alpha: float, k_min: int = 1, k_max: int = 100
    ) -> "JointDegreeDistribution":
        """Independent product of two truncated power laws P(k) ~ k^-alpha."""
        if k_min < 1 or k_max < k_min:
            raise DomainError("need 1 <= k_min <= k_max")
        ks = range(k_min, k_max + 1)
        w = [k ** (-alpha) for k in ks]
        z = sum(w)
        pmf = [(k, wk / z) for k, wk in zip(ks, w)]
        return JointDegreeDistribution.product(pmf, pmf)

    @staticmethod
    def from_sequence(seq: BiDegreeSequence) -> "JointDegreeDistribution":
        """Empirical pair distribution n_{k,l} / n of a sequence."""
        if seq.n == 0:
            raise EmptySequence("cannot take the empirical law of an empty sequence")
        return JointDegreeDistribution.table(
            (k, ell, 1.0) for k, ell in seq.pairs
        )

    @staticmethod
    def from_spec(spec: dict | str) -> "JointDegreeDistribution":
        """Parse the JSON distribution spec {"family": ..., parameters...}."""
        if isinstance(spec, str):
            spec = json.loads(spec)
        family = spec.get("family")
        if family == "point":
            return JointDegreeDistribution.point(spec["d_in"], spec["d_out"])
        if family == "poisson_product":
            return JointDegreeDistribution.poisson_product(
                spec["mu_in"], spec["mu_out"],
                tail_mass=spec.get("tail_mass", _DEFAULT_TAIL_MASS),
            )
        if family == "table":
            return JointDegreeDistribution.table(spec["entries"])
        if family == "powerlaw_product":
            return JointDegreeDistribution.powerlaw_product(
                spec["alpha"], spec.get("k_min", 1), spec.get("k_max", 100)
            )
        raise DomainError(f"unknown distribution family: {family!r}")

    # -- accessors ---------------------------------------------------------

    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.support])

    def pair_array(self) -> np.ndarray:
        return np.array([kl for kl, _ in self.support], dtype=np.int64)

    def mean_in(self) -> float:
        return sum(k * p for (k, _), p in self.support)

    def mean_out(self) -> float:
        return sum(ell * p for (_, ell), p in self.support)


@dataclass(frozen=True)
class SequenceStats:
    """Exact summary statistics of a bi-degree sequence."""

    n: int
    m: int
    lambda_n: Fraction
    nu_n: Fraction
    second_moments: tuple[Fraction, Fraction, Fraction]
    delta_n: int
    counts: dict = field(compare=False)


def _truncated_poisson(mu: float, tail_mass: float):
    """Poisson(mu) pmf truncated so the lost upper-tail mass is <= tail_mass."""
    if mu < 0:
        raise DomainError(f"negative Poisson mean {mu}")
    if mu == 0:
        return [(0, 1.0)], 0.0
    pmf = []
    p = math.exp(-mu)
    cum = p
    k = 0
    pmf.append((0, p))
    while 1.0 - cum > tail_mass:
        k += 1
        p *= mu / k
        cum += p
        pmf.append((k, p))
        if k > 10_000:
            raise DomainError("Poisson truncation did not converge")
    lost = max(0.0, 1.0 - cum)
    z = cum
    return [(k, p / z) for k, p in pmf], lost


def validate_sequence(pairs) -> BiDegreeSequence:
    """Validate degree pairs and return the sequence with `m` computed."""
    tup = []
    sum_in = 0
    sum_out = 0
    for k, ell in pairs:
        k = int(k)
        ell = int(ell)
        if k < 0 or ell < 0:
            raise DomainError(f"negative degree in pair ({k}, {ell})")
        sum_in += k
        sum_out += ell
        tup.append((k, ell))
    if sum_in != sum_out:
        raise SumMismatch(sum_in, sum_out)
    return BiDegreeSequence(tuple(tup), n=len(tup), m=sum_in)


def sample_sequence(
    dist: JointDegreeDistribution, n: int, rng: np.random.Generator
) -> BiDegreeSequence:
    """Draw n i.i.d. pairs from `dist` and repair the sums to match.

    Repair redraws the pair at a uniformly random index until the in- and
    out-totals agree, capped at 100*n redraws.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    probs = dist.probabilities()
    kl = dist.pair_array()
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    d_in = kl[idx, 0].copy()
    d_out = kl[idx, 1].copy()
    diff = int(d_in.sum() - d_out.sum())
    budget = _REPAIR_FACTOR * n
    while diff != 0:
        if budget == 0:
            raise RepairBudgetExceeded(
                f"could not balance degree sums within {_REPAIR_FACTOR * n} redraws"
            )
        budget -= 1
        j = int(rng.integers(n))
        i = int(np.searchsorted(cdf, rng.random(), side="right"))
        diff += int(kl[i, 0] - d_in[j]) - int(kl[i, 1] - d_out[j])
        d_in[j] = kl[i, 0]
        d_out[j] = kl[i, 1]
    return validate_sequence(zip(d_in.tolist(), d_out.tolist()))


def stats(seq: BiDegreeSequence) -> SequenceStats:
    """Exact sequence statistics; integer accumulation before any division."""
    if seq.m == 0:
        raise EmptySequence("stats undefined for a sequence with m == 0")
    n, m = seq.n, seq.m
    s_in2 = 0
    s_out2 = 0
    s_prod = 0
    delta = 0
    counts: dict[tuple[int, int], int] = {}
    for k, ell in seq.pairs:
        s_in2 += k * k
        s_out2 += ell * ell
        s_prod += k * ell
        if k > delta:
            delta = k
        if ell > delta:
            delta = ell
        counts[(k, ell)] = counts.get((k, ell), 0) + 1
    return SequenceStats(
        n=n,
        m=m,
        lambda_n=Fraction(m, n),
        nu_n=Fraction(s_prod, m),
        second_moments=(Fraction(s_in2, n), Fraction(s_out2, n), Fraction(s_prod, n)),
        delta_n=delta,
        counts=counts,
    )


def subset_degree_sums(seq: BiDegreeSequence, subset, i: int, j: int) -> int:
    """Exact d_S(i, j) = sum over v in S of (d_in(v))^i * (d_out(v))^j."""
    if i not in (0, 1, 2) or j not in (0, 1, 2):
        raise DomainError(f"exponents must be in {{0, 1, 2}}, got ({i}, {j})")
    total = 0
    for v in subset:
        v = int(v)
        if v < 0 or v >= seq.n:
            raise IndexOutOfRange(f"vertex {v} outside [0, {seq.n})")
        k, ell = seq.pairs[v]
        total += k**i * ell**j
    return total


# -- file formats ----------------------------------------------------------


def read_degree_file(path) -> BiDegreeSequence:
    """Read "d_in d_out" lines; '#' starts a comment line."""
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected two integers, got {line!r}")
            pairs.append((int(parts[0]), int(parts[1])))
    return validate_sequence(pairs)


def write_degree_file(seq: BiDegreeSequence, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={seq.n} m={seq.m}\n")
        for k, ell in seq.pairs:
            fh.write(f"{k} {ell}\n")
