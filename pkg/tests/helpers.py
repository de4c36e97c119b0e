"""Independent oracles used by the test suite.

Everything here is written from scratch against the definitions, not by
calling back into the package, so agreement is meaningful.
"""

from fractions import Fraction
from itertools import permutations

import numpy as np

from dicomo.degmodel import BiDegreeSequence


def floyd_warshall(n, src, tgt):
    """Dense hop-distance matrix by min-plus iteration; np.inf = unreachable."""
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, v in zip(src, tgt):
        if u != v:
            dist[u, v] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return dist


def all_pairings(m):
    """Every tail-to-head matching of m half-edges on each side."""
    return permutations(range(m))


def exact_path_expectation(seq: BiDegreeSequence, allowed, k: int) -> Fraction:
    """E[P_k(e+, e-, I)] over the uniform pairing, exactly.

    (prod_{i=1}^{k} 1/(m-i+1)) * sum over distinct (v_1..v_{k-1}) in
    `allowed` of prod d_in(v_i) d_out(v_i).
    """
    m = seq.m
    if k > m:
        return Fraction(0)  # a length-k path needs k distinct pairings
    pref = Fraction(1)
    for i in range(1, k + 1):
        pref /= m - i + 1
    total = Fraction(0)
    verts = list(allowed)

    def rec(depth, used, prod):
        nonlocal total
        if depth == k - 1:
            total += prod
            return
        for v in verts:
            if v in used:
                continue
            d_in, d_out = seq.pairs[v]
            used.add(v)
            rec(depth + 1, used, prod * d_in * d_out)
            used.remove(v)

    rec(0, set(), Fraction(1))
    return pref * total


def survival_bisection_poisson(mu: float, tol: float = 1e-12) -> float:
    """Root of 1 - s = exp(-mu s) in (0, 1), bisected; 0 when mu <= 1."""
    if mu <= 1.0:
        return 0.0
    f = lambda s: 1.0 - s - np.exp(-mu * s)
    lo, hi = tol, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def chi2_pvalue(observed, expected_probs, total):
    """Chi-square goodness-of-fit p-value over the given category order."""
    from scipy.stats import chi2

    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected_probs, dtype=float) * total
    stat = float(((obs - exp) ** 2 / exp).sum())
    return chi2.sf(stat, len(obs) - 1), stat


def small_sequences(n_max=3, deg_max=3, m_max=6):
    """All balanced bi-degree sequences up to the given caps, with m >= 1."""
    from itertools import product

    pairs = [(k, l) for k in range(deg_max + 1) for l in range(deg_max + 1)]
    out = []
    seen = set()
    for n in range(1, n_max + 1):
        for combo in product(pairs, repeat=n):
            s_in = sum(p[0] for p in combo)
            s_out = sum(p[1] for p in combo)
            if s_in != s_out or not 1 <= s_in <= m_max:
                continue
            key = tuple(sorted(combo))
            if key in seen:
                continue
            seen.add(key)
            out.append(combo)
    return out
