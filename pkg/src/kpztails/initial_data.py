"""Initial-data classes for the KPZ / stochastic-heat-equation toolkit.

Scaled initial profiles f live on the KPZ-scaled coordinate y; the unscaled
height at lattice position x is H_0(x) = T^(1/3) f((2T)^(-2/3) x).  Admissible
profiles satisfy a parabolic upper bound f(y) <= C + nu*y^2/2^(2/3) and a
floor condition: some subinterval of [-M, M] of length theta on which
f >= -kappa.  Profiles are piecewise linear on a finite grid with -inf
sentinel values allowed (f is -inf outside its grid).

Height observables at time 2T are centered and scaled by

    upsilon(y)  = (H(2T, (2T)^(2/3) y) + T/12) / T^(1/3)          narrow wedge
    h(y)        = (H(2T, (2T)^(2/3) y) + T/12 - (2/3) log(2T)) / T^(1/3)

the second form applying to general and Brownian initial data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

TWO_THIRD_POW = 2.0 ** (2.0 / 3.0)


@dataclass(frozen=True)
class HypParams:
    """Admissibility parameters (C, nu, theta, kappa, M) for scaled profiles."""

    C: float
    nu: float
    theta: float
    kappa: float
    M: float

    def __post_init__(self) -> None:
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie strictly inside (0, 1), got {self.nu}")
        for name in ("theta", "kappa", "M"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.theta > 2.0 * self.M:
            raise ValueError(
                f"theta={self.theta} exceeds 2M={2 * self.M}; "
                "a length-theta subinterval must fit inside [-M, M]"
            )


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear profile y -> f(y) on a strictly increasing grid.

    Values may be -inf (excluded region).  Outside the grid f is -inf.
    """

    y: np.ndarray
    f: np.ndarray

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "f", f)
        if y.ndim != 1 or y.size < 2:
            raise ValueError("profile grid needs at least two points")
        if y.shape != f.shape:
            raise ValueError("grid and value arrays must have equal length")
        if not np.all(np.diff(y) > 0):
            raise ValueError("profile grid must be strictly increasing")
        if np.any(np.isnan(f)) or np.any(f == np.inf):
            raise ValueError("profile values must be finite or -inf")

    def __call__(self, yq) -> np.ndarray:
        """Evaluate by linear interpolation; -inf outside the grid and on any
        segment with a -inf endpoint (except exactly at a finite node)."""
        yq = np.asarray(yq, dtype=float)
        scalar = yq.ndim == 0
        yq = np.atleast_1d(yq)
        out = np.full(yq.shape, -np.inf)
        inside = (yq >= self.y[0]) & (yq <= self.y[-1])
        if np.any(inside):
            yi = yq[inside]
            idx = np.clip(np.searchsorted(self.y, yi, side="right") - 1, 0, self.y.size - 2)
            y0, y1 = self.y[idx], self.y[idx + 1]
            f0, f1 = self.f[idx], self.f[idx + 1]
            t = (yi - y0) / (y1 - y0)
            with np.errstate(invalid="ignore"):
                vals = np.where(
                    t == 0.0, f0,
                    np.where(
                        t == 1.0, f1,
                        np.where(np.isfinite(f0) & np.isfinite(f1),
                                 f0 + t * (f1 - f0), -np.inf),
                    ),
                )
            # exact hit on the last node
            vals = np.where(yi == self.y[-1], self.f[-1], vals)
            out[inside] = vals
        return out[0] if scalar else out


def load_profile_csv(path) -> Profile:
    """Read a two-column (y, f(y)) CSV; the literal "-inf" (ASCII or unicode
    minus) is accepted for excluded regions.  A single non-numeric header row
    is skipped."""
    ys, fs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            cells = [c.strip().replace("−", "-") for c in row[:2]]
            try:
                yv = float(cells[0])
            except ValueError:
                if not ys:
                    continue  # header
                raise
            fv = float(cells[1])
            ys.append(yv)
            fs.append(fv)
    return Profile(np.asarray(ys), np.asarray(fs))


@dataclass(frozen=True)
class NarrowWedge:
    """Delta initial mass at the origin."""


@dataclass(frozen=True)
class Flat:
    """H_0 identically zero (f identically 0)."""


@dataclass(frozen=True)
class BrownianTwoSided:
    """Two-sided Brownian H_0 pinned to 0 at the origin."""

    seed: int = 0
    diffusion_coeff: float = 1.0

    def __post_init__(self) -> None:
        if self.diffusion_coeff <= 0:
            raise ValueError("diffusion_coeff must be positive")


@dataclass(frozen=True)
class GeneralScaled:
    """Scaled profile f with its admissibility parameters."""

    profile: Profile
    hyp: HypParams


InitialData = Union[NarrowWedge, Flat, BrownianTwoSided, GeneralScaled]


@dataclass(frozen=True)
class HypReport:
    parabola_ok: bool
    floor_ok: bool
    witness: Optional[tuple]
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.parabola_ok and self.floor_ok


def validate_hyp(profile: Profile, hyp: HypParams) -> HypReport:
    """Check the parabolic bound and the floor condition for a profile.

    The parabolic bound f(y) <= C + nu*y^2/2^(2/3) is checked at grid nodes
    and segment midpoints.  The floor condition searches [-M, M] for a
    subinterval of length theta with f >= -kappa; piecewise linearity makes
    the feasible set a finite union of intervals, computed exactly.  The
    returned witness is the centered length-theta subinterval of the first
    feasible run that is long enough.
    """
    if profile.y[0] > -hyp.M or profile.y[-1] < hyp.M:
        raise ValueError(
            f"profile grid [{profile.y[0]}, {profile.y[-1]}] does not cover "
            f"[-M, M] = [{-hyp.M}, {hyp.M}]"
        )

    mids = 0.5 * (profile.y[:-1] + profile.y[1:])
    pts = np.concatenate([profile.y, mids])
    vals = np.concatenate([profile.f, profile(mids)])
    cap = hyp.C + hyp.nu * pts**2 / TWO_THIRD_POW
    bad = vals > cap
    parabola_ok = not np.any(bad)
    worst = None
    if not parabola_ok:
        i = int(np.argmax(vals - cap))
        worst = (float(pts[i]), float(vals[i]), float(cap[i]))

    runs = _floor_runs(profile, -hyp.kappa, -hyp.M, hyp.M)
    witness = None
    for lo, hi in runs:
        if hi - lo >= hyp.theta:
            mid = 0.5 * (lo + hi)
            witness = (mid - hyp.theta / 2.0, mid + hyp.theta / 2.0)
            break
    floor_ok = witness is not None
    return HypReport(
        parabola_ok=parabola_ok,
        floor_ok=floor_ok,
        witness=witness,
        detail={"parabola_worst": worst, "floor_runs": runs},
    )


def _floor_runs(profile: Profile, level: float, lo: float, hi: float) -> list:
    """Maximal subintervals of [lo, hi] on which the profile is >= level."""
    grid = np.unique(np.concatenate([[lo, hi], profile.y[(profile.y > lo) & (profile.y < hi)]]))
    runs = []
    cur = None
    for a, b in zip(grid[:-1], grid[1:]):
        fa, fb = float(profile(a)), float(profile(b))
        segs = []
        if fa >= level and fb >= level:
            segs.append((a, b))
        elif fa >= level or fb >= level:
            if np.isfinite(fa) and np.isfinite(fb):
                t = (level - fa) / (fb - fa)
                c = a + t * (b - a)
                segs.append((a, c) if fa >= level else (c, b))
            else:
                # one endpoint is -inf: f >= level only at the finite node
                pass
        for s in segs:
            if cur is not None and abs(s[0] - cur[1]) < 1e-12:
                cur = (cur[0], s[1])
            else:
                if cur is not None:
                    runs.append(cur)
                cur = s
    if cur is not None:
        runs.append(cur)
    return runs


@dataclass(frozen=True)
class UnscaledInitial:
    """H_0 on the lattice: either a delta marker or a gridded function."""

    kind: str  # "delta" or "grid"
    x: Optional[np.ndarray] = None
    H0: Optional[np.ndarray] = None


def make_unscaled_initial(data: InitialData, T: float,
                          x_grid: Optional[np.ndarray] = None) -> UnscaledInitial:
    """Build the unscaled initial height H_0 for a given time horizon T.

    GeneralScaled uses H_0(x) = T^(1/3) f((2T)^(-2/3) x) on x_grid (or on the
    profile's own grid mapped to lattice coordinates when x_grid is None).
    Flat returns zeros, BrownianTwoSided draws a pinned two-sided path, and
    NarrowWedge returns a delta marker resolved by the solver.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if isinstance(data, NarrowWedge):
        return UnscaledInitial(kind="delta")
    if isinstance(data, Flat):
        if x_grid is None:
            raise ValueError("Flat initial data needs an x_grid")
        return UnscaledInitial(kind="grid", x=np.asarray(x_grid, float),
                               H0=np.zeros(len(x_grid)))
    if isinstance(data, BrownianTwoSided):
        if x_grid is None:
            raise ValueError("Brownian initial data needs an x_grid")
        x = np.asarray(x_grid, float)
        H0 = _two_sided_brownian(x, data.diffusion_coeff, data.seed)
        return UnscaledInitial(kind="grid", x=x, H0=H0)
    if isinstance(data, GeneralScaled):
        scale = (2.0 * T) ** (2.0 / 3.0)
        if x_grid is None:
            x = scale * data.profile.y
            f = data.profile.f
        else:
            x = np.asarray(x_grid, float)
            f = data.profile(x / scale)
        return UnscaledInitial(kind="grid", x=x, H0=T ** (1.0 / 3.0) * f)
    raise TypeError(f"unknown initial data {data!r}")


def _two_sided_brownian(x: np.ndarray, coeff: float, seed) -> np.ndarray:
    """Gaussian path with B(0)=0 and Var[B(x)] = coeff*|x| on a sorted grid."""
    rng = np.random.default_rng(seed)
    H0 = np.zeros(x.size)
    pos = np.flatnonzero(x > 0)
    neg = np.flatnonzero(x < 0)[::-1]  # walk outward from 0
    for side in (pos, neg):
        prev_x, prev_v = 0.0, 0.0
        for i in side:
            dv = math.sqrt(coeff * abs(x[i] - prev_x)) * rng.standard_normal()
            H0[i] = prev_v + dv
            prev_x, prev_v = x[i], H0[i]
    return H0


@dataclass(frozen=True)
class ScaledHeightSample:
    """Centered/scaled height values on a y grid."""

    T: float
    y_grid: np.ndarray
    values: np.ndarray
    kind: str  # "upsilon", "general", "brownian"

    def __post_init__(self) -> None:
        y = np.asarray(self.y_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "y_grid", y)
        object.__setattr__(self, "values", v)
        if self.kind not in ("upsilon", "general", "brownian"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if y.size > 1 and not np.all(np.diff(y) > 0):
            raise ValueError("y_grid must be strictly increasing")
        if v.shape[-1] != y.size:
            raise ValueError("values and y_grid length mismatch")
        if not np.all(np.isfinite(v)):
            raise ValueError("scaled height values must be finite")


def scale_center_height(H, T: float, kind: str, y_grid) -> ScaledHeightSample:
    """Center and scale a height-at-time-2T array sampled at X=(2T)^(2/3) y.

    kind "upsilon" applies (H + T/12)/T^(1/3); "general" and "brownian"
    subtract the extra (2/3) log(2T).
    """
    H = np.asarray(H, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    if H.shape[-1] != y_grid.size:
        raise ValueError(
            f"height array has {H.shape[-1]} columns but y_grid has {y_grid.size}"
        )
    center = T / 12.0
    if kind in ("general", "brownian"):
        center -= (2.0 / 3.0) * math.log(2.0 * T)
    vals = (H + center) / T ** (1.0 / 3.0)
    return ScaledHeightSample(T=T, y_grid=y_grid, values=vals, kind=kind)
