"""Experiment orchestration: presets, runners, and deterministic artifacts.

Each runner takes (config, seed, out_dir), writes CSV/JSON artifacts, and
returns a summary dict with a "status" of "pass" or "fail" plus named
checks.  Artifacts are byte-deterministic for a given (config, seed):
floats are formatted with repr-faithful %.17g, JSON is sorted, and no
timestamps or environment data enter the outputs.

Sections and the acceptance checks they exercise at the configured scale:
simulate (first-moment oracle), bounds (envelope tables for every
theorem), moments (closed form k=1 and the psi sandwich), gibbs (free
resampler vs free bridge), airy (Laplace identity lhs vs rhs), report
(tail CIs vs clamped envelopes with UNTESTABLE-AT-SCALE labeling).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .airy import laplace_lhs, laplace_rhs, sample_gue_edge_many
from .bounds import BoundQuery, evaluate_query
from .bridges import BridgeSpec, GibbsSpec, gibbs_resample
from .initial_data import BrownianTwoSided, Flat, NarrowWedge, scale_center_height
from .moments import SANDWICH_FACTOR, moment_exact, psi
from .she import SolverConfig, solve_she_ensemble
from .tails import VIOLATION, bound_violation_report, mc_tail

__all__ = [
    "ExperimentConfig",
    "preset_config",
    "simulate_samples",
    "run_simulate",
    "run_bounds",
    "run_moments",
    "run_gibbs",
    "run_airy",
    "run_report",
    "run_all",
    "PRESETS",
]

_INITIALS = ("narrow_wedge", "flat", "brownian")
_SEED_OFFSET = {"narrow_wedge": 0, "flat": 1, "brownian": 2, "airy_sim": 3,
                "airy_edge": 4, "gibbs": 5, "brownian_path": 7}

# theorem families judged against each initial condition's tails
_REPORT_THEOREMS = {
    "narrow_wedge": ("nw_lower", "nw_upper"),
    "flat": ("general_lower", "general_upper"),
    "brownian": ("brownian_lower", "brownian_upper"),
}

_ALL_THEOREMS = ("general_lower", "nw_lower", "nw_upper", "general_upper",
                 "brownian_lower", "brownian_upper", "nw_upper_laplace")


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs for one experiment bundle; JSON-round-trippable."""

    preset: str = "smoke"
    initials: tuple = _INITIALS
    T: float = 1.0
    n_samples: int = 1000
    s_grid: tuple = (0.5, 1.0, 1.5, 2.0, 3.0, 5.0)
    alpha: float = 0.01
    eps: float = 0.1
    delta: float = 0.1
    mu: float = 0.1
    zeta: float = 0.1
    constants: dict = field(default_factory=lambda: {
        "K": 1.0, "K1": 1.0, "K2": 1.0, "s0": 0.0})
    dx: float = 0.05
    dt: Optional[float] = 1.25e-3
    extent: float = 4.0
    gibbs_n: int = 200
    gibbs_wall: float = -0.3
    airy_n: int = 300
    airy_N: int = 512
    airy_K: int = 10
    airy_T: float = 2.0
    airy_s: tuple = (-1.0, 0.0, 1.0)
    airy_extent: float = 4.0
    moments_k: tuple = (1, 2)
    moments_T: tuple = (1.0, 4.0)

    def __post_init__(self) -> None:
        if self.n_samples < 2 or self.gibbs_n < 2 or self.airy_n < 2:
            raise ValueError("sample counts must be at least 2")
        bad = [i for i in self.initials if i not in _INITIALS]
        if bad:
            raise ValueError(f"unknown initial data names: {bad}")
        if not self.T > 0.0 or not self.airy_T > 0.0:
            raise ValueError("T must be positive")
        if any(s <= 0.0 for s in self.s_grid):
            raise ValueError("tail thresholds must be positive")

    def solver(self, extent: Optional[float] = None) -> SolverConfig:
        return SolverConfig(dx=self.dx, dt=self.dt,
                            extent=self.extent if extent is None else extent)

    def to_json(self) -> str:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return json.dumps(d, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        d = json.loads(text)
        for k in ("initials", "s_grid", "airy_s", "moments_k", "moments_T"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


PRESETS = {
    "smoke": ExperimentConfig(),
    "full": ExperimentConfig(
        preset="full",
        n_samples=10**4,
        s_grid=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0),
        extent=6.0,
        gibbs_n=1000,
        airy_n=2000,
        moments_k=(1, 2, 3),
        moments_T=(4.0, 8.0),
    ),
}


def preset_config(name: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    cfg = PRESETS[name]
    if overrides:
        for k in ("initials", "s_grid", "airy_s", "moments_k", "moments_T"):
            if k in overrides:
                overrides[k] = tuple(overrides[k])
        cfg = replace(cfg, **overrides)
    return cfg


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _initial_object(name: str, seed: int):
    if name == "narrow_wedge":
        return NarrowWedge(), "upsilon"
    if name == "flat":
        return Flat(), "general"
    return (BrownianTwoSided(seed=seed * 10 + _SEED_OFFSET["brownian_path"]),
            "brownian")


def simulate_samples(config: ExperimentConfig, seed: int, initial: str,
                     T: Optional[float] = None, n: Optional[int] = None,
                     extent: Optional[float] = None) -> np.ndarray:
    """Centered/scaled one-point height samples at X = 0 for one initial."""
    T = config.T if T is None else T
    n = config.n_samples if n is None else n
    obj, kind = _initial_object(initial, seed)
    res = solve_she_ensemble(
        obj, T, config.solver(extent), seed=seed * 10 + _SEED_OFFSET[initial],
        n_replicas=n)
    H = res.H[:, -1, :]  # final probe time, X = 0 column
    return scale_center_height(H, T, kind, y_grid=[0.0]).values[:, 0]


def _collect_samples(config: ExperimentConfig, seed: int) -> dict:
    return {name: simulate_samples(config, seed, name)
            for name in config.initials}


def run_simulate(config: ExperimentConfig, seed: int, out_dir,
                 samples: Optional[dict] = None) -> dict:
    """Sample scaled heights per initial condition; check the Z first moment."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if samples is None:
        samples = _collect_samples(config, seed)
    checks, artifacts = {}, []
    t13 = config.T ** (1.0 / 3.0)
    exact = 1.0 / (2.0 * math.sqrt(math.pi * config.T))
    stats_block = {}
    for name in config.initials:
        vals = samples[name]
        path = out / f"samples_{name}.csv"
        _write_csv(path, ["replica", "value"],
                   ((i, float(v)) for i, v in enumerate(vals)))
        artifacts.append(path.name)
        stats_block[name] = {
            "n": int(vals.size),
            "mean": float(vals.mean()),
            "sd": float(vals.std(ddof=1)),
        }
        if name == "narrow_wedge":
            # invert the upsilon scaling back to Z(2T, 0) for the oracle
            z = np.exp(t13 * vals - config.T / 12.0)
            se = z.std(ddof=1) / math.sqrt(z.size)
            checks["first_moment_z"] = bool(abs(z.mean() - exact) <= 3.0 * se)
            stats_block[name]["z_mean"] = float(z.mean())
            stats_block[name]["z_se"] = float(se)
            stats_block[name]["z_exact"] = exact
    summary = {
        "command": "simulate",
        "preset": config.preset,
        "seed": seed,
        "T": config.T,
        "stats": stats_block,
        "checks": checks,
        "status": "pass" if all(checks.values()) else "fail",
        "artifacts": artifacts,
    }
    _write_json(out / "simulate_summary.json", summary)
    return summary


def run_bounds(config: ExperimentConfig, seed: int, out_dir) -> dict:
    """Evaluate every theorem envelope over the s grid (informational)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s_values = config.s_grid or (0.5, 1.0, 2.0, 4.0, 8.0)
    rows = []
    for theorem in _ALL_THEOREMS:
        for s in s_values:
            q = BoundQuery(theorem=theorem, s=s, T=config.T, eps=config.eps,
                           delta=config.delta, mu=config.mu, zeta=config.zeta,
                           constants=dict(config.constants))
            for label, res in evaluate_query(q):
                rows.append((theorem, label, s, config.T, res.value,
                             "" if res.value_lower is None else res.value_lower,
                             res.regime,
                             "" if res.c1 is None else res.c1,
                             "" if res.c2 is None else res.c2,
                             res.validity_note))
    path = out / "bounds.csv"
    _write_csv(path, ["theorem", "label", "s", "T", "value", "value_lower",
                      "regime", "c1", "c2", "validity_note"], rows)
    summary = {
        "command": "bounds",
        "preset": config.preset,
        "seed": seed,
        "rows": len(rows),
        "checks": {},
        "status": "pass",
        "artifacts": [path.name],
    }
    _write_json(out / "bounds_summary.json", summary)
    return summary


def run_moments(config: ExperimentConfig, seed: int, out_dir) -> dict:
    """Exact moments vs the psi sandwich; k=1 closed form as a hard check."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, sandwich_ok, closed_ok = [], True, True
    for T in config.moments_T:
        for k in config.moments_k:
            res = moment_exact(k, T)
            lo = psi(k, T)
            rows.append((k, T, res.value, lo, SANDWICH_FACTOR * lo,
                         res.in_sandwich, res.quad_error))
            sandwich_ok = sandwich_ok and res.in_sandwich
            if k == 1:
                closed = math.exp(T / 12.0) / (2.0 * math.sqrt(math.pi * T))
                closed_ok = closed_ok and abs(res.value - closed) <= 1e-8
    path = out / "moments.csv"
    _write_csv(path, ["k", "T", "moment", "psi", "psi69", "in_sandwich",
                      "quad_error"], rows)
    checks = {"psi_sandwich": bool(sandwich_ok),
              "k1_closed_form": bool(closed_ok)}
    summary = {
        "command": "moments",
        "preset": config.preset,
        "seed": seed,
        "checks": checks,
        "status": "pass" if all(checks.values()) else "fail",
        "artifacts": [path.name],
    }
    _write_json(out / "moments_summary.json", summary)
    return summary


def run_gibbs(config: ExperimentConfig, seed: int, out_dir) -> dict:
    """Resample bridges under a soft wall; record paths and acceptance."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bridge = BridgeSpec(a=0.0, b=1.0, x=0.0, y=0.0, step=1.0 / 64.0)
    spec = GibbsSpec(bridge=bridge, T=config.T, lower_curve=config.gibbs_wall)
    res = gibbs_resample(spec, seed=seed * 10 + _SEED_OFFSET["gibbs"],
                         n=config.gibbs_n)
    path = out / "gibbs_paths.csv"
    header = ["replica"] + [f"x{i}" for i in range(res.grid.size)]
    _write_csv(path, header,
               ((i, *map(float, row)) for i, row in enumerate(res.paths)))
    checks = {"accepted_requested": bool(res.paths.shape[0] == config.gibbs_n)}
    summary = {
        "command": "gibbs",
        "preset": config.preset,
        "seed": seed,
        "grid": [float(g) for g in res.grid],
        "n_proposals": int(res.n_proposals),
        "n_accepted": int(res.n_accepted),
        "acceptance_rate": float(res.acceptance_rate),
        "mean_weight": float(res.mean_weight),
        "max_weight": float(res.max_weight),
        "checks": checks,
        "status": "pass" if all(checks.values()) else "fail",
        "artifacts": [path.name],
    }
    _write_json(out / "gibbs_summary.json", summary)
    return summary


def run_airy(config: ExperimentConfig, seed: int, out_dir) -> dict:
    """Laplace identity: simulated lhs vs GUE-edge rhs at each level."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ups = simulate_samples(config, seed * 10 + _SEED_OFFSET["airy_sim"],
                           "narrow_wedge", T=config.airy_T, n=config.airy_n,
                           extent=config.airy_extent)
    edges = sample_gue_edge_many(config.airy_N, config.airy_K,
                                 seed=seed * 10 + _SEED_OFFSET["airy_edge"],
                                 n_samples=config.airy_n)
    rows, ok = [], True
    for s in config.airy_s:
        lhs = laplace_lhs(ups, s=s, T=config.airy_T)
        rhs = laplace_rhs(edges, s=s, T=config.airy_T)
        within = bool(abs(lhs.value - rhs.value)
                      <= 3.0 * (lhs.se + rhs.se) + 0.05)
        ok = ok and within
        rows.append((s, config.airy_T, lhs.value, rhs.value, lhs.se, rhs.se,
                     rhs.truncation_bound, within))
    path = out / "airy.csv"
    _write_csv(path, ["s", "T", "lhs", "rhs", "se_lhs", "se_rhs",
                      "truncation_bound", "within_tolerance"], rows)
    checks = {"laplace_identity": bool(ok)}
    summary = {
        "command": "airy",
        "preset": config.preset,
        "seed": seed,
        "N": config.airy_N,
        "K": config.airy_K,
        "n": config.airy_n,
        "checks": checks,
        "status": "pass" if all(checks.values()) else "fail",
        "artifacts": [path.name],
    }
    _write_json(out / "airy_summary.json", summary)
    return summary


def run_report(config: ExperimentConfig, seed: int, out_dir,
               samples: Optional[dict] = None) -> dict:
    """Tail CIs vs clamped envelopes for every initial's theorem pair."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if samples is None:
        samples = _collect_samples(config, seed)
    rows = []
    counts = {"CONSISTENT": 0, "VIOLATION": 0, "UNTESTABLE-AT-SCALE": 0}
    for name in config.initials:
        vals = samples[name]
        for theorem in _REPORT_THEOREMS[name]:
            side = "lower" if theorem.endswith("lower") else "upper"
            ests = [mc_tail(vals, s, side, config.alpha)
                    for s in config.s_grid]
            queries = [BoundQuery(theorem=theorem, s=s, T=config.T,
                                  eps=config.eps, delta=config.delta,
                                  mu=config.mu, zeta=config.zeta,
                                  constants=dict(config.constants))
                       for s in config.s_grid]
            for v in bound_violation_report(ests, queries):
                counts[v.verdict] += 1
                rows.append((name, v.theorem, v.direction, v.side, v.s, v.T,
                             v.envelope_raw, v.envelope, v.estimate, v.ci_lo,
                             v.ci_hi, v.n, v.hits, v.verdict, v.slack,
                             v.regime))
    path = out / "report.csv"
    _write_csv(path, ["initial", "theorem", "direction", "side", "s", "T",
                      "envelope_raw", "envelope", "estimate", "ci_lo", "ci_hi",
                      "n", "hits", "verdict", "slack", "regime"], rows)
    checks = {"no_envelope_violation": counts[VIOLATION] == 0}
    summary = {
        "command": "report",
        "preset": config.preset,
        "seed": seed,
        "verdicts": counts,
        "checks": checks,
        "status": "pass" if all(checks.values()) else "fail",
        "artifacts": [path.name],
    }
    _write_json(out / "report_summary.json", summary)
    return summary


def run_all(config: ExperimentConfig, seed: int, out_dir) -> dict:
    """Run every section; with an empty s grid, skip simulation and report.

    Returns a merged summary; overall status is "pass" iff every executed
    section passed (UNTESTABLE-AT-SCALE cells never fail a run).
    """
    out = Path(out_dir)
    sections = {}
    if config.s_grid:
        samples = _collect_samples(config, seed)
        sections["simulate"] = run_simulate(config, seed, out, samples)
        sections["report"] = run_report(config, seed, out, samples)
    sections["bounds"] = run_bounds(config, seed, out)
    sections["moments"] = run_moments(config, seed, out)
    sections["gibbs"] = run_gibbs(config, seed, out)
    sections["airy"] = run_airy(config, seed, out)
    status = "pass" if all(s["status"] == "pass"
                           for s in sections.values()) else "fail"
    summary = {
        "command": "all",
        "preset": config.preset,
        "seed": seed,
        "status": status,
        "sections": {k: v["status"] for k, v in sections.items()},
        "artifacts": sorted(a for s in sections.values()
                            for a in s["artifacts"]),
    }
    _write_json(out / "summary.json", summary)
    return summary
