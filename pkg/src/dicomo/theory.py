"""Analytic quantities: generating functions, size biasing, survival
probabilities, conjugate distributions and the limiting diameter constants.

The conjugate means are always computed by two independent routes (the
second derivative of the bivariate generating function, and the mean of the
conjugated size-biased marginal) and required to agree; disagreement raises
instead of warning so truncation artifacts cannot slip through.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

from .degmodel import JointDegreeDistribution, _truncated_poisson
from .errors import (
    CriticalRegime,
    DomainError,
    NotNormalized,
    SelfCheckFailed,
    ZeroMeanDegree,
    ZeroNu,
)

_PMF_TOL = 1e-12
_FIXED_POINT_TOL = 1e-14
_FIXED_POINT_MAX_ITER = 10**6
_CROSS_CHECK_TOL = 1e-8
_CRITICAL_TOL = 1e-9
_MARGINAL_MEAN_TOL = 1e-6


@dataclass(frozen=True)
class OffspringDistribution:
    """One-dimensional pmf of a nonnegative offspring count."""

    pmf: tuple[tuple[int, float], ...]
    mean: float

    def __post_init__(self):
        total = 0.0
        mu = 0.0
        for k, p in self.pmf:
            if k < 0:
                raise DomainError(f"negative offspring count {k}")
            if p < 0:
                raise DomainError(f"negative probability {p} at {k}")
            total += p
            mu += k * p
        if abs(total - 1.0) > _PMF_TOL:
            raise DomainError(f"pmf mass {total} not normalized")
        if abs(mu - self.mean) > _PMF_TOL * max(1.0, abs(mu)):
            raise DomainError(f"declared mean {self.mean} != computed mean {mu}")

    @staticmethod
    def from_probs(items) -> "OffspringDistribution":
        pmf = tuple(sorted((int(k), float(p)) for k, p in dict(items).items()))
        mean = sum(k * p for k, p in pmf)
        return OffspringDistribution(pmf, mean)

    @staticmethod
    def point(k: int) -> "OffspringDistribution":
        return OffspringDistribution(((int(k), 1.0),), float(k))

    @staticmethod
    def poisson(mu: float, tail_mass: float = 1e-12) -> "OffspringDistribution":
        pmf, _ = _truncated_poisson(mu, tail_mass)
        return OffspringDistribution.from_probs(pmf)

    @staticmethod
    def from_spec(spec: dict | str) -> "OffspringDistribution":
        if isinstance(spec, str):
            spec = json.loads(spec)
        if "pmf" in spec:
            return OffspringDistribution.from_probs((k, p) for k, p in spec["pmf"])
        family = spec.get("family")
        if family == "poisson":
            return OffspringDistribution.poisson(
                spec["mean"], spec.get("tail_mass", 1e-12)
            )
        if family == "point":
            return OffspringDistribution.point(spec["value"])
        raise DomainError(f"unknown offspring spec: {spec!r}")

    def pgf(self, z: float) -> float:
        return sum(p * z**k for k, p in self.pmf)

    def pgf_derivative(self, z: float) -> float:
        return sum(p * k * z ** (k - 1) for k, p in self.pmf if k >= 1)

    def prob(self, k: int) -> float:
        for kk, p in self.pmf:
            if kk == k:
                return p
        return 0.0


@dataclass(frozen=True)
class TheoryConstants:
    """Closed-form limiting constants of a joint degree distribution."""

    regime: str  # "supercritical" | "subcritical"
    lam: float
    nu: float
    s_plus: float
    s_minus: float
    nu_hat_plus: float
    nu_hat_minus: float
    t_plus_coeff: float
    t_minus_coeff: float
    diameter_coeff: float
    typical_coeff: float | None
    truncation_mass: float
    solver_iterations: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def bivariate_pgf_eval(
    dist: JointDegreeDistribution, z: float, w: float, dz: int = 0, dw: int = 0
) -> float:
    """Partial derivative of order (dz, dw) in {0,1}^2 of f(z, w) at (z, w)."""
    if not (0.0 <= z <= 1.0 and 0.0 <= w <= 1.0):
        raise DomainError(f"(z, w) = ({z}, {w}) outside [0, 1]^2")
    if dz not in (0, 1) or dw not in (0, 1):
        raise DomainError("derivative orders must be 0 or 1")
    total = 0.0
    for (k, ell), p in dist.support:
        term = p
        if dz:
            if k == 0:
                continue
            term *= k * _pow(z, k - 1)
        else:
            term *= _pow(z, k)
        if dw:
            if ell == 0:
                continue
            term *= ell * _pow(w, ell - 1)
        else:
            term *= _pow(w, ell)
        total += term
    return total


def _pow(x: float, e: int) -> float:
    # 0**0 == 1 by the generating-function convention
    return 1.0 if e == 0 else x**e


def size_biased(dist: JointDegreeDistribution, direction: str):
    """In- or out-size biased joint law and its relevant marginal.

    direction "in": joint D_in with P(D_in=(k-1,l)) = k*p(k,l)/lambda and the
    marginal of its out-coordinate (the forward offspring law). Direction
    "out" is the mirror image.
    """
    if direction not in ("in", "out"):
        raise DomainError(f"direction must be 'in' or 'out', got {direction!r}")
    lam = dist.mean_in() if direction == "in" else dist.mean_out()
    if lam <= 0:
        raise ZeroMeanDegree("size biasing undefined at zero mean degree")
    joint: dict[tuple[int, int], float] = {}
    marginal: dict[int, float] = {}
    for (k, ell), p in dist.support:
        if direction == "in":
            if k == 0:
                continue
            pair = (k - 1, ell)
            weight = k * p / lam
            out_coord = ell
        else:
            if ell == 0:
                continue
            pair = (k, ell - 1)
            weight = ell * p / lam
            out_coord = k
        joint[pair] = joint.get(pair, 0.0) + weight
        marginal[out_coord] = marginal.get(out_coord, 0.0) + weight
    joint_dist = JointDegreeDistribution(
        tuple(sorted(joint.items())), dist.truncation_mass
    )
    return joint_dist, OffspringDistribution.from_probs(marginal)


def _survival_fixed_point(xi: OffspringDistribution):
    """Smallest root of h(w) = w via monotone iteration from 0; returns (s, iters)."""
    if xi.mean <= 1.0:
        return 0.0, 0
    w = 0.0
    for it in range(1, _FIXED_POINT_MAX_ITER + 1):
        w_next = xi.pgf(w)
        if abs(w_next - w) < _FIXED_POINT_TOL:
            return 1.0 - w_next, it
        w = w_next
    return 1.0 - w, _FIXED_POINT_MAX_ITER


def survival_probability(xi: OffspringDistribution) -> float:
    """Survival probability s in [0, 1]; 0 analytically when the mean is <= 1."""
    s, _ = _survival_fixed_point(xi)
    return s


def conjugate(xi: OffspringDistribution, s: float) -> OffspringDistribution:
    """Conjugate offspring law for survival probability s.

    s < 1: P(xi_hat = l) = (1-s)^(l-1) P(xi = l); the s = 1 limit collapses
    to {0: 1 - P(xi = 1), 1: P(xi = 1)}.
    """
    if not (0.0 <= s <= 1.0):
        raise DomainError(f"survival probability {s} outside [0, 1]")
    if s == 1.0:
        p1 = xi.prob(1)
        return OffspringDistribution.from_probs({0: 1.0 - p1, 1: p1})
    rho = 1.0 - s
    raw = {k: rho ** (k - 1) * p for k, p in xi.pmf}
    total = sum(raw.values())
    if abs(total - 1.0) > 1e-8:
        raise NotNormalized(
            f"conjugate mass {total}; s={s} is inconsistent with the pmf"
        )
    return OffspringDistribution.from_probs({k: p / total for k, p in raw.items()})


def poisson_conjugate_mean(nu: float) -> float:
    """Unique root of x e^-x = nu e^-nu in (0, 1), by bisection to 1e-12."""
    if nu <= 1.0:
        raise DomainError(f"need nu > 1, got {nu}")
    target = nu * math.exp(-nu)
    lo, hi = 0.0, 1.0
    # x e^-x is increasing on (0, 1)
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        if mid * math.exp(-mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _t_coeff(nu_hat: float) -> float:
    # Convention 1 / log(1/0) = 0
    if nu_hat <= 0.0:
        return 0.0
    return 1.0 / math.log(1.0 / nu_hat)


def theory_constants(dist: JointDegreeDistribution) -> TheoryConstants:
    """All limiting constants of the degree distribution's asymptotics."""
    mean_in = dist.mean_in()
    mean_out = dist.mean_out()
    if abs(mean_in - mean_out) > _MARGINAL_MEAN_TOL * max(1.0, mean_in, mean_out):
        raise DomainError(
            f"marginal means differ: E[D_in]={mean_in}, E[D_out]={mean_out}"
        )
    lam = (mean_in + mean_out) / 2
    if lam <= 0:
        raise ZeroMeanDegree("mean degree is zero")
    nu = bivariate_pgf_eval(dist, 1.0, 1.0, 1, 1) / lam
    if nu == 0.0:
        raise ZeroNu("expansion rate is zero")
    if abs(nu - 1.0) < _CRITICAL_TOL:
        raise CriticalRegime(f"nu = {nu} is within {_CRITICAL_TOL} of 1")

    iters: dict[str, int] = {}
    if nu > 1.0:
        _, d_in_plus = size_biased(dist, "in")
        _, d_out_minus = size_biased(dist, "out")
        s_plus, it_p = _survival_fixed_point(d_in_plus)
        s_minus, it_m = _survival_fixed_point(d_out_minus)
        iters["s_plus"] = it_p
        iters["s_minus"] = it_m

        nu_hat_plus = bivariate_pgf_eval(dist, 1.0, 1.0 - s_plus, 1, 1) / lam
        nu_hat_minus = bivariate_pgf_eval(dist, 1.0 - s_minus, 1.0, 1, 1) / lam
        # independent route: mean of the conjugated size-biased marginal
        alt_plus = conjugate(d_in_plus, s_plus).mean
        alt_minus = conjugate(d_out_minus, s_minus).mean
        if abs(nu_hat_plus - alt_plus) > _CROSS_CHECK_TOL:
            raise SelfCheckFailed(
                f"nu_hat_plus: g-route {nu_hat_plus} vs conjugate-mean {alt_plus}"
            )
        if abs(nu_hat_minus - alt_minus) > _CROSS_CHECK_TOL:
            raise SelfCheckFailed(
                f"nu_hat_minus: g-route {nu_hat_minus} vs conjugate-mean {alt_minus}"
            )
        t_plus = _t_coeff(nu_hat_plus)
        t_minus = _t_coeff(nu_hat_minus)
        return TheoryConstants(
            regime="supercritical",
            lam=lam,
            nu=nu,
            s_plus=s_plus,
            s_minus=s_minus,
            nu_hat_plus=nu_hat_plus,
            nu_hat_minus=nu_hat_minus,
            t_plus_coeff=t_plus,
            t_minus_coeff=t_minus,
            diameter_coeff=t_plus + t_minus + 1.0 / math.log(nu),
            typical_coeff=1.0 / math.log(nu),
            truncation_mass=dist.truncation_mass,
            solver_iterations=iters,
        )

    # subcritical: s = 0 and the conjugate equals the original law
    return TheoryConstants(
        regime="subcritical",
        lam=lam,
        nu=nu,
        s_plus=0.0,
        s_minus=0.0,
        nu_hat_plus=nu,
        nu_hat_minus=nu,
        t_plus_coeff=0.0,
        t_minus_coeff=0.0,
        diameter_coeff=1.0 / math.log(1.0 / nu),
        typical_coeff=None,
        truncation_mass=dist.truncation_mass,
        solver_iterations=iters,
    )
