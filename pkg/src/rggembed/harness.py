"""Seeded experiments: threshold sweeps, diameter lower bounds, region
concentration, and the 1-d greedy curve.

Everything is replayable: a configuration plus a master seed determines all
trial seeds (and so all outputs except wall-clock timings).  A sweep draws
one independent trial seed per (radius, trial) pair up front, so individual
trials can be re-run in isolation from their recorded seed.

Two parameter modes exist.  ``paper`` uses the exact constants (headroom
epsilon and part weight m = s^(-d) n / (8 d)); at workstation scale these
are typically infeasible (epsilon above the ball limit, m below one vertex
weight) and the trial records *why* instead of crashing.  ``sim`` caps
epsilon at 0.5 and accepts explicit overrides for both knobs so that
scaled-down qualitative runs are possible.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats as sstats

from . import geometry, rgg, trees, embed as embed_mod

TREE_FAMILIES = ("truncated_regular", "uniform", "bounded_random", "path")


# ---------------------------------------------------------------------------
# small statistics helpers

def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def is_statistically_nondecreasing(successes, trials, alpha: float = 0.05) -> bool:
    """No adjacent pair of the curve shows a significant drop (one-sided
    Fisher exact test at level alpha)."""
    for i in range(len(successes) - 1):
        table = [
            [successes[i], trials[i] - successes[i]],
            [successes[i + 1], trials[i + 1] - successes[i + 1]],
        ]
        _, p = sstats.fisher_exact(table, alternative="greater")
        if p < alpha:
            return False
    return True


# ---------------------------------------------------------------------------
# configuration and per-trial records

@dataclass
class ExperimentConfig:
    """Parameters of a universality sweep (also used for single trials)."""

    n: int
    d: int
    delta: int
    tree_family: str = "bounded_random"
    r_values: tuple = ()          # explicit radii; exclusive with r_multipliers
    r_multipliers: tuple = ()     # multiples of r_c
    trials: int = 1
    seed: int = 0
    mode: str = "sim"             # "paper" | "sim"
    epsilon_override: float | None = None
    m_override: float | None = None
    fix_tree: bool = False
    compute_event_a: bool = True
    store_embeddings: bool = True
    output_format: str = "csv"
    output_path: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.tree_family not in TREE_FAMILIES:
            raise ValueError(f"unknown tree family {self.tree_family!r}")
        if self.mode not in ("paper", "sim"):
            raise ValueError(f"mode must be 'paper' or 'sim', got {self.mode!r}")
        if bool(self.r_values) == bool(self.r_multipliers):
            raise ValueError("give exactly one of r_values / r_multipliers (non-empty)")
        rs = self.r_values or self.r_multipliers
        if any(x <= 0 for x in rs):
            raise ValueError("radii and multipliers must be positive")

    def radii(self) -> list[tuple[float, float | None]]:
        """List of (r, multiplier-or-None) pairs this config sweeps."""
        if self.r_values:
            return [(float(r), None) for r in self.r_values]
        r_c = geometry.critical_radius(self.n, self.d, self.delta)
        return [(mult * r_c, float(mult)) for mult in self.r_multipliers]


@dataclass
class TrialRecord:
    """One universality trial.  ``status`` is success / failure / infeasible;
    timings are informational and excluded from the replay contract."""

    status: str
    n: int
    d: int
    delta: int
    r: float
    r_multiplier: float | None
    seed: int
    family: str
    s: int | None = None
    eta: int | None = None
    epsilon_eff: float | None = None
    m: float | None = None
    k: int | None = None
    tree_max_degree: int | None = None
    failure_step: int | None = None
    failure_resource: str | None = None
    failure_demanded: float | None = None
    failure_available: float | None = None
    infeasible_reason: str | None = None
    event_a1_ok: bool | None = None
    event_a2_ok: bool | None = None
    validator_ok: bool | None = None
    runtime_s: float = 0.0
    embedding: np.ndarray | None = None

    def replay_key(self) -> tuple:
        """The deterministic part of the record (everything but timings and
        the embedding array itself)."""
        skip = {"runtime_s", "embedding"}
        return tuple(v for k, v in sorted(asdict(self).items()) if k not in skip)

    def to_row(self) -> dict:
        row = asdict(self)
        row.pop("embedding")
        return row


@dataclass
class _SharedGeometry:
    """Tessellation + transit balls reused across the trials of one config."""

    tess: geometry.Tessellation | None
    balls: geometry.BallSystem | None
    epsilon_eff: float | None
    m: float | None
    infeasible_reason: str | None


def _prepare_geometry(config: ExperimentConfig) -> _SharedGeometry:
    n, d, delta = config.n, config.d, config.delta
    try:
        if config.mode == "paper":
            eps = geometry.epsilon_param(n, d, delta)
            if config.epsilon_override is not None:
                raise ValueError("epsilon_override is a simulation-mode knob")
        else:
            eps = geometry.simulation_epsilon(n, d, delta, config.epsilon_override)
        s = geometry.choose_odd_s(n, d, delta, eps)
        tess = geometry.build_tessellation(d, s)
        balls = geometry.BallSystem(tess, eps)
    except geometry.GeometryInfeasible as exc:
        return _SharedGeometry(None, None, None, None, str(exc))

    m_paper = n / (8 * d * s**d)
    m = m_paper
    if config.m_override is not None:
        if config.mode == "paper":
            raise ValueError("m_override is a simulation-mode knob")
        m = float(config.m_override)
    m0 = m / (delta + 1)
    if m0 < 1.0 - 1e-12:
        return _SharedGeometry(
            tess,
            balls,
            eps,
            None,
            f"part weight window infeasible: m0 = m/(delta+1) = {m0:.4g} < 1 "
            f"(m = {m:.6g}); unit vertex weights exceed m0",
        )
    if m >= n:
        return _SharedGeometry(
            tess, balls, eps, None,
            f"m = {m:.6g} >= n = {n}: the whole tree is a single anchor-free part",
        )
    return _SharedGeometry(tess, balls, eps, m, None)


def _make_tree(config: ExperimentConfig, seed) -> trees.Tree:
    family = config.tree_family
    if family == "truncated_regular":
        return trees.truncated_regular_tree(config.n, config.delta)
    if family == "path":
        return trees.path_tree(config.n)
    if family == "uniform":
        return trees.uniform_random_tree(config.n, seed)
    if family == "bounded_random":
        return trees.random_bounded_degree_tree(config.n, config.delta, seed)
    raise ValueError(f"unknown tree family {family!r}")


def run_universality_trial(
    config: ExperimentConfig,
    r: float,
    seed: int,
    shared: _SharedGeometry | None = None,
    r_multiplier: float | None = None,
    fixed_tree: trees.Tree | None = None,
) -> TrialRecord:
    """Sample points and colours, generate one tree, run the embedding, and
    validate any success.  Infeasible constructions are recorded, not raised.
    """
    t0 = time.perf_counter()
    n, d, delta = config.n, config.d, config.delta
    ss = np.random.SeedSequence(seed)
    seed_points, seed_colors, seed_tree = ss.spawn(3)

    base = dict(
        n=n, d=d, delta=delta, r=float(r), r_multiplier=r_multiplier,
        seed=seed, family=config.tree_family,
    )

    if n <= 2:
        # no tessellation at this size; embed identically and validate
        points = rgg.sample_points(n, d, seed_points)
        graph = rgg.build_graph(points, r)
        mapping = np.arange(n, dtype=np.int64)
        ok = True
        if n == 2:
            ok = graph.has_edge(0, 1)
        status = "success" if ok else "failure"
        emb = mapping if ok else None
        return TrialRecord(
            status=status, validator_ok=ok if ok else None,
            embedding=emb if config.store_embeddings else None,
            runtime_s=time.perf_counter() - t0, **base,
        )

    if shared is None:
        shared = _prepare_geometry(config)
    if shared.infeasible_reason is not None:
        return TrialRecord(
            status="infeasible",
            infeasible_reason=shared.infeasible_reason,
            s=shared.tess.s if shared.tess else None,
            epsilon_eff=shared.epsilon_eff,
            runtime_s=time.perf_counter() - t0,
            **base,
        )
    tess, balls, m = shared.tess, shared.balls, shared.m

    points = rgg.sample_points(n, d, seed_points)
    colors = rgg.color_points(points, 0.5, seed_colors)
    graph = rgg.build_graph(points, r)
    tree = fixed_tree if fixed_tree is not None else _make_tree(config, seed_tree)

    record = TrialRecord(
        status="",
        s=tess.s,
        eta=tess.eta,
        epsilon_eff=shared.epsilon_eff,
        m=m,
        tree_max_degree=tree.max_degree(),
        **base,
    )

    if config.compute_event_a:
        report = embed_mod.check_event_a(graph, colors, tess, balls)
        record.event_a1_ok = report.a1_ok
        record.event_a2_ok = report.a2_ok

    if tree.max_degree() > delta:
        record.status = "infeasible"
        record.infeasible_reason = (
            f"tree max degree {tree.max_degree()} exceeds delta = {delta}"
        )
        record.runtime_s = time.perf_counter() - t0
        return record

    result = embed_mod.embed_tree(tree, graph, colors, tess, balls, m, delta)
    record.k = result.diagnostics.get("k")
    if result.ok:
        check = embed_mod.verify_embedding(tree, graph, result)
        record.status = "success"
        record.validator_ok = check.ok
        if config.store_embeddings:
            record.embedding = result.map
    else:
        record.status = "failure"
        record.failure_step = result.failure.step
        record.failure_resource = result.failure.resource
        record.failure_demanded = result.failure.demanded
        record.failure_available = result.failure.available
    record.runtime_s = time.perf_counter() - t0
    return record


@dataclass
class CurvePoint:
    r: float
    r_multiplier: float | None
    trials: int
    successes: int
    frequency: float
    wilson_low: float
    wilson_high: float
    mean_runtime_s: float
    failures_geometry: int
    failures_step1: int
    failures_step2: int
    infeasible: int

    def to_row(self) -> dict:
        return asdict(self)


@dataclass
class ThresholdCurve:
    config: ExperimentConfig
    points: list[CurvePoint]
    records: list[list[TrialRecord]]

    def frequencies(self) -> list[float]:
        return [p.frequency for p in self.points]

    def nondecreasing(self, alpha: float = 0.05) -> bool:
        return is_statistically_nondecreasing(
            [p.successes for p in self.points],
            [p.trials for p in self.points],
            alpha,
        )


def run_threshold_sweep(config: ExperimentConfig) -> ThresholdCurve:
    """Independent trials for every radius with split RNG streams."""
    radii = config.radii()
    rng = np.random.default_rng(config.seed)
    trial_seeds = rng.integers(0, 2**63 - 1, size=(len(radii), config.trials))

    fixed_tree = None
    if config.fix_tree:
        tree_seed = np.random.SeedSequence(config.seed).spawn(1)[0]
        fixed_tree = _make_tree(config, tree_seed)

    shared = _prepare_geometry(config) if config.n > 2 else None
    points: list[CurvePoint] = []
    all_records: list[list[TrialRecord]] = []
    for i, (r, mult) in enumerate(radii):
        recs = [
            run_universality_trial(
                config, r, int(trial_seeds[i, j]), shared=shared,
                r_multiplier=mult, fixed_tree=fixed_tree,
            )
            for j in range(config.trials)
        ]
        all_records.append(recs)
        successes = sum(rec.status == "success" for rec in recs)
        lo, hi = wilson_interval(successes, len(recs))
        points.append(
            CurvePoint(
                r=r,
                r_multiplier=mult,
                trials=len(recs),
                successes=successes,
                frequency=successes / len(recs),
                wilson_low=lo,
                wilson_high=hi,
                mean_runtime_s=float(np.mean([rec.runtime_s for rec in recs])),
                failures_geometry=sum(
                    rec.status == "failure" and rec.failure_step == 0 for rec in recs
                ),
                failures_step1=sum(
                    rec.status == "failure" and rec.failure_step == 1 for rec in recs
                ),
                failures_step2=sum(
                    rec.status == "failure" and rec.failure_step == 2 for rec in recs
                ),
                infeasible=sum(rec.status == "infeasible" for rec in recs),
            )
        )
    return ThresholdCurve(config=config, points=points, records=all_records)


# ---------------------------------------------------------------------------
# lower-bound experiment

@dataclass
class LowerBoundTrial:
    seed: int
    diameter: float
    diameter_exact: bool
    obstructed: bool          # diameter (or its lower bound) exceeds 2h
    corner_occupied: bool


@dataclass
class LowerBoundRecord:
    n: int
    d: int
    delta: int
    r: float
    h: int
    two_h: int
    analytic_diameter_bound: float
    corner_hit_probability: float   # 1 - (1 - n^(-1/2))^n
    trials: list[LowerBoundTrial]

    @property
    def obstruction_fraction(self) -> float:
        return sum(t.obstructed for t in self.trials) / len(self.trials)

    @property
    def corner_fraction(self) -> float:
        return sum(t.corner_occupied for t in self.trials) / len(self.trials)

    def to_rows(self) -> list[dict]:
        common = dict(
            n=self.n, d=self.d, delta=self.delta, r=self.r, h=self.h,
            two_h=self.two_h, analytic_diameter_bound=self.analytic_diameter_bound,
            corner_hit_probability=self.corner_hit_probability,
        )
        return [dict(common, **asdict(t)) for t in self.trials]


def run_lower_bound_experiment(
    n: int, d: int, delta: int, r: float, trials: int, seed: int,
    exact_cutoff: int = 20000,
) -> LowerBoundRecord:
    """Hop-diameter (lower bound) of G_d(n, r) versus twice the height of the
    truncated regular tree; a trial is *obstructed* when the diameter bound
    exceeds 2h, certifying that the tree cannot embed in that sample."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if r <= 0:
        raise ValueError("r must be positive")
    h = trees.height_h(n, delta)
    corner_side = n ** (-1.0 / (2 * d))
    seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=trials)
    out = []
    for s_i in seeds:
        points = rgg.sample_points(n, d, int(s_i))
        graph = rgg.build_graph(points, r)
        diam = rgg.hop_diameter(graph, exact_cutoff=exact_cutoff)
        corner = bool(np.any(np.all(points.coords <= corner_side, axis=1)))
        out.append(
            LowerBoundTrial(
                seed=int(s_i),
                diameter=diam.value,
                diameter_exact=diam.exact,
                obstructed=bool(diam.value > 2 * h),
                corner_occupied=corner,
            )
        )
    return LowerBoundRecord(
        n=n,
        d=d,
        delta=delta,
        r=r,
        h=h,
        two_h=2 * h,
        analytic_diameter_bound=(1 - 2 * n ** (-1.0 / (2 * d))) * math.sqrt(d) / r,
        corner_hit_probability=1.0 - (1.0 - n**-0.5) ** n,
        trials=out,
    )


# ---------------------------------------------------------------------------
# concentration experiment

@dataclass
class ConcentrationRecord:
    n: int
    a: float
    p: float
    trials: int
    expected: float                  # a * n * p
    deviation: float                 # (anp)^(2/3)
    bound: float                     # 2 exp(-(anp)^(1/3) / 3)
    violations: int
    counts: list[int]

    @property
    def violation_frequency(self) -> float:
        return self.violations / self.trials

    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.violations, self.trials)

    def to_rows(self) -> list[dict]:
        common = dict(
            n=self.n, a=self.a, p=self.p, expected=self.expected,
            deviation=self.deviation, bound=self.bound,
        )
        return [
            dict(common, trial=i, count=c,
                 violation=bool(abs(c - self.expected) > self.deviation))
            for i, c in enumerate(self.counts)
        ]


def run_concentration_check(
    n: int, a: float, p: float, trials: int, seed: int
) -> ConcentrationRecord:
    """Empirical tail frequency of the thinned point count in a region of
    volume a, against the bound 2 exp(-(anp)^(1/3)/3).

    Honest simulation on the line: sample n uniform points, count those in
    [0, a], keep each independently with probability p.
    """
    if not 0 < p <= 1:
        raise ValueError("p must be in (0, 1]")
    if n < 10 / p:
        raise ValueError(f"need n >= 10/p = {10 / p:.6g}")
    if not 0 < a <= 1:
        raise ValueError("a must be in (0, 1]")
    if a < 10 / (n * p):
        raise ValueError(f"need a >= 10/(np) = {10 / (n * p):.6g}")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    anp = a * n * p
    deviation = anp ** (2.0 / 3.0)
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(trials):
        xs = rng.random(n)
        in_region = xs <= a
        if p == 1.0:
            kept = int(in_region.sum())
        else:
            kept = int((in_region & (rng.random(n) < p)).sum())
        counts.append(kept)
    violations = sum(abs(c - anp) > deviation for c in counts)
    return ConcentrationRecord(
        n=n,
        a=a,
        p=p,
        trials=trials,
        expected=anp,
        deviation=deviation,
        bound=2.0 * math.exp(-(anp ** (1.0 / 3.0)) / 3.0),
        violations=violations,
        counts=counts,
    )


# ---------------------------------------------------------------------------
# 1-d greedy experiment

@dataclass
class Prop1Point:
    c: float
    r: float
    trials: int
    successes: int
    frequency: float
    wilson_low: float
    wilson_high: float
    mean_tree_height: float
    mean_tree_width: float

    def to_row(self) -> dict:
        return asdict(self)


@dataclass
class Prop1Curve:
    n: int
    points: list[Prop1Point]

    def nondecreasing(self, alpha: float = 0.05) -> bool:
        return is_statistically_nondecreasing(
            [p.successes for p in self.points],
            [p.trials for p in self.points],
            alpha,
        )


def run_prop1_experiment(n: int, c_values, trials: int, seed: int) -> Prop1Curve:
    """Greedy line-embedding success frequency for uniform random trees at
    r = c * n^(-1/2), plus the observed height/width of the sampled trees."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < 2:
        raise ValueError("n must be >= 2")
    c_values = [float(c) for c in c_values]
    if any(c <= 0 for c in c_values):
        raise ValueError("c values must be positive")

    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=(len(c_values), trials))
    points_out = []
    for i, c in enumerate(c_values):
        r = min(c * n**-0.5, 1.0)
        successes = 0
        heights, widths = [], []
        for j in range(trials):
            ss = np.random.SeedSequence(int(seeds[i, j]))
            s_pts, s_tree = ss.spawn(2)
            pts = rgg.sample_points(n, 1, s_pts)
            graph = rgg.build_graph(pts, r)
            tree = trees.uniform_random_tree(n, s_tree)
            heights.append(trees.height_from(tree, 0))
            widths.append(trees.width_from(tree, 0))
            result = embed_mod.greedy_line_embed(tree, graph)
            if result.ok:
                check = embed_mod.verify_embedding(tree, graph, result)
                assert check.ok, "greedy success failed independent validation"
                successes += 1
        lo, hi = wilson_interval(successes, trials)
        points_out.append(
            Prop1Point(
                c=c,
                r=r,
                trials=trials,
                successes=successes,
                frequency=successes / trials,
                wilson_low=lo,
                wilson_high=hi,
                mean_tree_height=float(np.mean(heights)),
                mean_tree_width=float(np.mean(widths)),
            )
        )
    return Prop1Curve(n=n, points=points_out)


# ---------------------------------------------------------------------------
# output

def write_rows(path, rows: list[dict], fmt: str = "csv") -> None:
    """Write a list of flat dicts as CSV (one header from the union of keys)
    or as a JSON array with the same fields."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(rows, fh, indent=2, default=str)
        return
    keys: list[str] = []
    for row in rows:
        for key in row:
            if key not in keys:
                keys.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        writer.writerows(rows)
