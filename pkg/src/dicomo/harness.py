"""Seeded experiment runner tying generation, algorithms, simulation and
closed-form constants into reproducible convergence reports.

Per-record seeds are derived from the master seed by hashing, never from a
shared stream, so records are identical no matter how work is scheduled.
Timing is reported in the JSON summary only; the CSV holds the deterministic
fields so two runs of one config are byte-comparable.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import gwsim
from .degmodel import JointDegreeDistribution, sample_sequence
from .errors import DicomoError, DomainError
from .graphalg import diameter_exact, thin_depth_scan, typical_distance_sample
from .graphgen import Digraph, binomial_digraph, d_out_model, pair_uniform, sample_simple
from .theory import (
    OffspringDistribution,
    conjugate,
    poisson_conjugate_mean,
    survival_probability,
    theory_constants,
)

_KINDS = ("diameter_convergence", "typical_distance", "thin_depth", "gw_suite")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment run."""

    kind: str
    model: dict
    sizes: tuple[int, ...] = ()
    replicates: int = 1
    master_seed: int = 0
    omega_rule: str | int = "default"
    threads: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if self.replicates < 1:
            raise DomainError("need replicates >= 1")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise DomainError("sizes must be strictly increasing")

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        return ExperimentConfig(
            kind=raw["kind"],
            model=raw.get("model", {}),
            sizes=tuple(int(x) for x in raw.get("sizes", ())),
            replicates=int(raw.get("replicates", 1)),
            master_seed=int(raw.get("master_seed", 0)),
            omega_rule=raw.get("omega_rule", "default"),
            threads=int(raw.get("threads", 1)),
            params=raw.get("params", {}),
        )


@dataclass(frozen=True)
class ResultRecord:
    """One measurement row; `error` is empty for clean records."""

    experiment: str
    n: int
    replicate: int
    seed: int
    measured: float | None
    prediction: float | None
    ratio: float | None
    wall_time_s: float
    error: str = ""


@dataclass(frozen=True)
class ModelTheory:
    """Limiting constants of a generation model, with provenance."""

    nu: float
    diameter_coeff: float
    typical_coeff: float | None
    provenance: dict


def derive_seed(master_seed: int, kind: str, n: int, replicate: int) -> int:
    """Stable 64-bit stream seed for one record."""
    key = f"{master_seed}:{kind}:{n}:{replicate}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def omega_default(n: int) -> int:
    """ceil(ln^6 n) capped at n // 10; at least 2."""
    raw = math.ceil(math.log(max(n, 2)) ** 6)
    return max(2, min(raw, max(2, n // 10)))


def model_constants(model: dict) -> ModelTheory:
    """Expansion rate and diameter coefficient of a model spec."""
    name = model.get("model", "dcm")
    if name in ("dcm", "dcm-simple"):
        tc = theory_constants(JointDegreeDistribution.from_spec(model["dist"]))
        return ModelTheory(
            nu=tc.nu,
            diameter_coeff=tc.diameter_coeff,
            typical_coeff=tc.typical_coeff,
            provenance=asdict(tc),
        )
    if name == "dout":
        d = int(model["d"])
        if d <= 1:
            raise DomainError("d-out constants need d >= 2")
        lam_d = poisson_conjugate_mean(float(d))
        coeff = 1.0 / math.log(1.0 / lam_d) + 1.0 / math.log(d)
        return ModelTheory(
            nu=float(d),
            diameter_coeff=coeff,
            typical_coeff=1.0 / math.log(d),
            provenance={"model": "dout", "d": d, "lambda_d": lam_d},
        )
    if name in ("binom", "binom-oriented"):
        c = float(model["c"])
        if c <= 1.0:
            raise DomainError("binomial constants need c > 1")
        nu_hat = poisson_conjugate_mean(c)
        coeff = 2.0 / math.log(1.0 / nu_hat) + 1.0 / math.log(c)
        return ModelTheory(
            nu=c,
            diameter_coeff=coeff,
            typical_coeff=1.0 / math.log(c),
            provenance={"model": name, "c": c, "nu_hat": nu_hat},
        )
    raise DomainError(f"unknown model {name!r}")


def generate(model: dict, n: int, rng: np.random.Generator) -> Digraph:
    """Build one graph sample of size n from a model spec."""
    name = model.get("model", "dcm")
    if name in ("dcm", "dcm-simple"):
        dist = JointDegreeDistribution.from_spec(model["dist"])
        seq = sample_sequence(dist, n, rng)
        if name == "dcm":
            return pair_uniform(seq, rng)
        return sample_simple(seq, rng, max_attempts=model.get("max_attempts", 1000))
    if name == "dout":
        return d_out_model(n, int(model["d"]), rng)
    if name in ("binom", "binom-oriented"):
        p = model["p"] if "p" in model else float(model["c"]) / n
        variant = "oriented" if name == "binom-oriented" else "independent"
        return binomial_digraph(n, float(p), variant, rng)
    raise DomainError(f"unknown model {name!r}")


class _SeedLedger:
    def __init__(self):
        self.seen: dict[int, tuple] = {}

    def claim(self, seed: int, key: tuple) -> int:
        if seed in self.seen and self.seen[seed] != key:
            raise DomainError(f"seed collision: {key} vs {self.seen[seed]}")
        self.seen[seed] = key
        return seed


def _per_size_records(cfg: ExperimentConfig, measure):
    """Generate per (n, replicate) records; failures become flagged rows."""
    ledger = _SeedLedger()
    records = []
    for n in cfg.sizes:
        for rep in range(cfg.replicates):
            seed = ledger.claim(
                derive_seed(cfg.master_seed, cfg.kind, n, rep), (cfg.kind, n, rep)
            )
            rng = np.random.default_rng(seed)
            t0 = time.perf_counter()
            try:
                measured, prediction, error = measure(n, rng)
            except DicomoError as exc:
                measured, prediction = None, None
                error = f"{type(exc).__name__}: {exc}"
            wall = time.perf_counter() - t0
            ratio = None
            if measured is not None and prediction is not None and prediction > 0:
                ratio = measured / prediction
            records.append(
                ResultRecord(
                    experiment=cfg.kind,
                    n=n,
                    replicate=rep,
                    seed=seed,
                    measured=measured,
                    prediction=prediction,
                    ratio=ratio,
                    wall_time_s=wall,
                    error=error,
                )
            )
    return records


def _size_means(records):
    means = {}
    for n in sorted({r.n for r in records}):
        vals = [r.measured for r in records if r.n == n and not r.error]
        means[n] = sum(vals) / len(vals) if vals else None
    return means


def run_diameter_convergence(cfg: ExperimentConfig) -> dict:
    """Exact diameters per size; increment statistic against diameter_coeff.

    The increment (mean diam(n2) - mean diam(n1)) / (ln n2 - ln n1) cancels
    the additive lower-order term that a raw diam/ln n ratio retains.
    """
    theory = model_constants(cfg.model)
    coeff = theory.diameter_coeff

    def measure(n, rng):
        g = generate(cfg.model, n, rng)
        diam = diameter_exact(g, threads=cfg.threads).diameter
        if n <= 1 or math.log(n) == 0.0:
            return float(diam), None, "ratio undefined at n <= 1"
        return float(diam), coeff * math.log(n), ""

    records = _per_size_records(cfg, measure)
    means = _size_means(records)
    sizes = [n for n in sorted(means) if means[n] is not None]
    increments = []
    for a, b in zip(sizes, sizes[1:]):
        increments.append(
            {
                "n_low": a,
                "n_high": b,
                "increment": (means[b] - means[a]) / (math.log(b) - math.log(a)),
            }
        )
    aggregate = None
    if len(sizes) >= 2:
        a, b = sizes[0], sizes[-1]
        aggregate = (means[b] - means[a]) / (math.log(b) - math.log(a))
    return {
        "kind": cfg.kind,
        "theory": asdict(theory),
        "records": records,
        "mean_diameter_by_n": means,
        "increments": increments,
        "aggregate_increment": aggregate,
        "diameter_coeff": coeff,
    }


def run_typical_distance(cfg: ExperimentConfig) -> dict:
    """Mean finite pairwise distance per size, against log_nu n."""
    theory = model_constants(cfg.model)
    if theory.nu <= 1.0:
        raise DomainError("typical distance needs a supercritical model")
    pairs = int(cfg.params.get("pairs", 10_000))
    log_nu = math.log(theory.nu)

    def measure(n, rng):
        g = generate(cfg.model, n, rng)
        finite, frac = typical_distance_sample(g, pairs, rng)
        if len(finite) == 0:
            return None, None, "no finite distances in sample"
        return float(finite.mean()), math.log(n) / log_nu, ""

    records = _per_size_records(cfg, measure)
    ratios = {}
    for n in sorted({r.n for r in records}):
        vals = [r.ratio for r in records if r.n == n and r.ratio is not None]
        ratios[n] = sum(vals) / len(vals) if vals else None
    return {
        "kind": cfg.kind,
        "theory": asdict(theory),
        "records": records,
        "mean_ratio_by_n": ratios,
    }


def run_thin_depth(cfg: ExperimentConfig) -> dict:
    """Fresh-probe thin-depth scans per size; reports max thin depth."""
    budget = int(cfg.params.get("budget", 200_000))
    omegas = {}

    def measure(n, rng):
        omega = (
            omega_default(n) if cfg.omega_rule == "default" else int(cfg.omega_rule)
        )
        omegas[n] = omega
        dist = JointDegreeDistribution.from_spec(cfg.model["dist"])
        seq = sample_sequence(dist, n, rng)
        scan = thin_depth_scan(seq, omega=omega, rng=rng, budget=budget)
        return float(scan.max_thin_depth), math.log(n), ""

    records = _per_size_records(cfg, measure)
    return {
        "kind": cfg.kind,
        "records": records,
        "omega_by_n": omegas,
        "max_thin_depth_by_n": _size_means(records),
    }


def _tv_distance(p: OffspringDistribution, q: OffspringDistribution) -> float:
    keys = {k for k, _ in p.pmf} | {k for k, _ in q.pmf}
    return 0.5 * sum(abs(p.prob(k) - q.prob(k)) for k in keys)


def run_gw_suite(cfg: ExperimentConfig) -> dict:
    """Branching-process Monte Carlo battery with closed-form targets.

    Every entry carries its estimate, target, tolerance and a passed flag;
    failures are entries, never exceptions.
    """
    p = cfg.params
    sup = OffspringDistribution.from_spec(p.get("supercritical", {"family": "poisson", "mean": 2.0}))
    sub = OffspringDistribution.from_spec(p.get("subcritical", {"family": "poisson", "mean": 0.5}))
    s = survival_probability(sup)
    conj = conjugate(sup, s)
    entries = []

    def seed_for(name):
        return derive_seed(cfg.master_seed, f"gw:{name}", 0, 0)

    # duality: extinct trees of the supercritical law look like the conjugate
    runs = int(p.get("duality_runs", 200_000))
    horizon = int(p.get("duality_horizon", 40))
    law = gwsim.extinct_root_offspring_law(sup, horizon, runs, seed_for("duality"))
    tv = _tv_distance(law, conj)
    tol = float(p.get("duality_tol", 0.01))
    entries.append(
        {"name": "duality_tv", "estimate": tv, "target": 0.0, "tol": tol, "passed": tv < tol}
    )

    # rare-event decay rate of staying positive but below omega
    omega = int(p.get("thin_omega", 50))
    ts = [int(t) for t in p.get("thin_ts", (6, 8, 10, 12))]
    truns = int(p.get("thin_runs", 500_000))
    logps = []
    kept_ts = []
    for t in ts:
        est, _ = gwsim.thin_event_probability(sup, omega, t, truns, seed_for(f"thin:{t}"))
        if est > 0:
            kept_ts.append(t)
            logps.append(math.log(est))
    target = math.log(conj.mean)
    tol = float(p.get("thin_tol", 0.1))
    if len(kept_ts) >= 2:
        slope = float(np.polyfit(kept_ts, logps, 1)[0])
        entries.append(
            {
                "name": "thin_slope",
                "estimate": slope,
                "target": target,
                "tol": tol,
                "passed": abs(slope - target) < tol,
            }
        )
    else:
        entries.append(
            {"name": "thin_slope", "estimate": None, "target": target, "tol": tol, "passed": False}
        )

    # subcritical survival decay rate
    st = int(p.get("sub_t", 10))
    sruns = int(p.get("sub_runs", 500_000))
    rate = gwsim.subcritical_decay(sub, st, sruns, seed_for("sub"))
    lo, hi = p.get("sub_range", (0.45, 0.56))
    entries.append(
        {
            "name": "subcritical_rate",
            "estimate": rate,
            "target": sub.mean,
            "tol": [lo, hi],
            "passed": lo <= rate <= hi,
        }
    )

    # certain survival when offspring is always at least 2
    point2 = OffspringDistribution.point(2)
    surv, _ = gwsim.estimate_survival(point2, 30, 1000, seed_for("point2"))
    entries.append(
        {"name": "point2_survival", "estimate": surv, "target": 1.0, "tol": 0.0, "passed": surv == 1.0}
    )

    return {
        "kind": cfg.kind,
        "entries": entries,
        "passed": all(e["passed"] for e in entries),
        "conjugate_mean": conj.mean,
        "survival": s,
    }


_RUNNERS = {
    "diameter_convergence": run_diameter_convergence,
    "typical_distance": run_typical_distance,
    "thin_depth": run_thin_depth,
    "gw_suite": run_gw_suite,
}


def run(cfg: ExperimentConfig) -> dict:
    return _RUNNERS[cfg.kind](cfg)


_CSV_COLUMNS = ("experiment", "n", "replicate", "seed", "measured", "prediction", "ratio", "error")
_CSV_TIMED_COLUMNS = _CSV_COLUMNS[:-1] + ("wall_time_s", "error")


def records_csv(records, include_timing: bool = False) -> str:
    """Stable-column CSV of result records.

    Timing is excluded by default so runs of the same config compare
    byte-for-byte; pass include_timing=True for profiling output.
    """
    cols = _CSV_TIMED_COLUMNS if include_timing else _CSV_COLUMNS
    lines = [",".join(cols)]
    for r in records:
        row = []
        for c in cols:
            v = getattr(r, c)
            if v is None:
                row.append("")
            elif isinstance(v, float):
                row.append(repr(v))
            else:
                row.append(str(v))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_report(report: dict, csv_path=None, json_path=None, cfg=None) -> None:
    """Write the CSV records and a JSON summary (records replaced by counts)."""
    records = report.get("records", [])
    if csv_path is not None:
        with open(csv_path, "w") as fh:
            fh.write(records_csv(records))
    if json_path is not None:
        summary = {k: v for k, v in report.items() if k != "records"}
        summary["record_count"] = len(records)
        summary["total_wall_time_s"] = sum(r.wall_time_s for r in records)
        if cfg is not None:
            summary["config"] = asdict(cfg)
        with open(json_path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
