"""Simulation world: zone geometry, fading, point processes, pair distance.

Users live in a disc (analytic-matched) or annulus (paper narrative) around
the base station; eavesdroppers form a homogeneous PPP whose region depends
on the sampling mode and transmission phase. All randomness flows through
per-trial counter-based Philox streams so trials are reproducible in any
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy import integrate as _sci_integrate

# sampling-mode tags
PAPER_GEOMETRY = "paper"
ANALYTIC_MATCHED = "analytic"

# eavesdropper sampling phases
PHASE1_FROM_BS = "phase1_from_bs"
PHASE2_FROM_STRONG_USER = "phase2_from_strong_user"

# per-trial stream lanes (Philox counter words); keeping users, pair link and
# eavesdroppers on separate lanes makes common-random-number coupling sharp
# across scenarios and sweep points
LANE_USERS = 0
LANE_PAIR = 1
LANE_EVES = 2

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NetworkGeometry:
    """Zone radii, path-loss exponent and eavesdropper density."""

    r_p: float = 5.0
    r_l: float = 10.0
    r_e: float = 100.0
    alpha: float = 4.0
    lambda_e: float = 1e-3

    def __post_init__(self):
        if not (0 < self.r_p < self.r_l < self.r_e):
            raise ValueError(
                f"zone radii must satisfy 0 < r_p < r_l < r_e, got "
                f"r_p={self.r_p}, r_l={self.r_l}, r_e={self.r_e}")
        if self.alpha < 2:
            raise ValueError(f"path-loss exponent must be >= 2, got {self.alpha}")
        if self.lambda_e < 0:
            raise ValueError(f"lambda_e must be >= 0, got {self.lambda_e}")

    @property
    def eta(self) -> float:
        return 2.0 / self.alpha


@dataclass(frozen=True)
class PairConfig:
    """One NOMA pair: order indices, power split, rates and powers (linear)."""

    n_l: int = 2
    m: int = 2
    n: int = 1
    a_m: float = sqrt(0.4)
    a_n: float = sqrt(0.6)
    p_bs: float = 1e6
    p_c: float = 100.0
    rate_m: float = 0.1
    rate_n: float = 0.1
    beta: float = 0.7
    lambda_mn: float = 1.0
    # Theorem-1 condition-2 studies probe a_m^2 above 1/2, where the NOMA
    # ordering a_n > a_m no longer holds; the flag lets those configs through
    # while the CLI keeps rejecting them.
    require_noma_order: bool = True

    def __post_init__(self):
        if self.a_m <= 0 or self.a_n <= 0:
            raise ValueError("amplitude coefficients must be positive")
        if abs(self.a_m**2 + self.a_n**2 - 1.0) > 1e-9:
            raise ValueError(
                f"a_m^2 + a_n^2 = 1 violated: {self.a_m**2 + self.a_n**2}")
        if self.require_noma_order and not self.a_n > self.a_m:
            raise ValueError(
                f"a_n > a_m violated: a_m^2={self.a_m**2:.4f}, "
                f"a_n^2={self.a_n**2:.4f}")
        if not (1 <= self.n < self.m <= self.n_l):
            raise ValueError(
                f"order indices must satisfy 1 <= n < m <= n_l, got "
                f"n={self.n}, m={self.m}, n_l={self.n_l}")
        if self.p_bs <= 0:
            raise ValueError("p_bs must be positive")
        if self.p_c < 0:
            raise ValueError("p_c must be nonnegative")
        if self.rate_m < 0 or self.rate_n < 0:
            raise ValueError("targeted rates must be nonnegative")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.lambda_mn <= 0:
            raise ValueError("lambda_mn must be positive")

    @property
    def a_m_sq(self) -> float:
        return self.a_m**2

    @property
    def a_n_sq(self) -> float:
        return self.a_n**2

    @property
    def theta(self) -> float:
        return self.a_n**2 / self.a_m**2


@dataclass(frozen=True)
class SamplingMode:
    """Which spatial law the sampler realizes.

    `paper` follows the narrated zones (users in the [r_p, r_l] annulus,
    eavesdroppers in [r_l, r_e]); `analytic` matches the assumptions behind
    the closed forms (users on the r_l disc, eavesdroppers from r_p outward
    in phase 1 and around the strong user in phase 2, truncated at r_max).
    """

    kind: str = ANALYTIC_MATCHED
    truncation_radius: float | None = None

    def __post_init__(self):
        if self.kind not in (PAPER_GEOMETRY, ANALYTIC_MATCHED):
            raise ValueError(f"unknown sampling mode {self.kind!r}")

    def r_max(self, geometry: NetworkGeometry) -> float:
        r = self.truncation_radius if self.truncation_radius is not None \
            else 10.0 * geometry.r_e
        if r <= geometry.r_e:
            raise ValueError(
                f"truncation radius must exceed r_e={geometry.r_e}, got {r}")
        return r


@dataclass(frozen=True)
class EavesdropperSet:
    """One world's eavesdroppers as parallel arrays.

    d_m is NaN when no strong-user position was supplied to the sampler.
    """

    d_bs: np.ndarray
    d_m: np.ndarray
    g_bs: np.ndarray
    g_m: np.ndarray

    def __len__(self) -> int:
        return self.d_bs.size


@dataclass(frozen=True)
class ChannelRealization:
    """One sampled world for a single transmission block."""

    ordered_user_gains: np.ndarray
    d_mn: float
    pair_fade: float
    eavesdroppers: EavesdropperSet


def _philox_key(master_seed: int, trial_index: int) -> np.ndarray:
    return np.array([master_seed & _MASK64, trial_index & _MASK64],
                    dtype=np.uint64)


def trial_rng(master_seed: int, trial_index: int,
              lane: int = LANE_USERS) -> np.random.Generator:
    """Independent stream for (seed, trial, lane), counter-based.

    Identical arguments give bit-identical draws regardless of how many other
    trials run, in whatever order, on however many workers.
    """
    counter = np.array([0, 0, 0, lane], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter,
                                                key=_philox_key(master_seed,
                                                                trial_index)))


class TrialStreams:
    """Reusable per-trial streams for hot loops.

    Resetting the underlying Philox state is ~10x cheaper than constructing a
    Generator and produces bit-identical draws (asserted in the test suite).
    Not safe to share across threads; give each worker its own instance.
    """

    def __init__(self):
        self._bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
        self._gen = np.random.Generator(self._bitgen)
        self._template = dict(self._bitgen.state)

    def get(self, master_seed: int, trial_index: int,
            lane: int = LANE_USERS) -> np.random.Generator:
        state = dict(self._template)
        state["state"] = {
            "counter": np.array([0, 0, 0, lane], dtype=np.uint64),
            "key": _philox_key(master_seed, trial_index),
        }
        state["buffer"] = np.zeros(4, dtype=np.uint64)
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        self._bitgen.state = state
        return self._gen


def _user_radii(geometry: NetworkGeometry, mode: SamplingMode,
                u: np.ndarray) -> np.ndarray:
    if mode.kind == ANALYTIC_MATCHED:
        return geometry.r_l * np.sqrt(u)
    lo2, hi2 = geometry.r_p**2, geometry.r_l**2
    return np.sqrt(lo2 + (hi2 - lo2) * u)


def sample_user_channels(geometry: NetworkGeometry, config: PairConfig,
                         rng: np.random.Generator, mode: SamplingMode,
                         size: int | None = None,
                         return_positions: bool = False):
    """Draw n_l user channel gains |h|^2 = fade / (1 + d^alpha), sorted ascending.

    With `size`, returns a (size, n_l) batch. With `return_positions`
    (unbatched only), also returns the user xy coordinates ordered to match
    the sorted gains, so callers can locate the order-m user.
    """
    if config.n_l < 2:
        raise ValueError("need at least two users to form a pair")
    shape = (config.n_l,) if size is None else (size, config.n_l)
    u = rng.random(shape)
    ang = rng.random(shape) * (2 * np.pi)
    fades = rng.standard_exponential(shape)
    radii = _user_radii(geometry, mode, u)
    gains = fades / (1.0 + radii**geometry.alpha)
    order = np.argsort(gains, axis=-1)
    gains_sorted = np.take_along_axis(gains, order, axis=-1)
    if not return_positions:
        return gains_sorted
    if size is not None:
        raise ValueError("return_positions only supported for single draws")
    xy = np.column_stack((radii * np.cos(ang), radii * np.sin(ang)))[order]
    return gains_sorted, xy


def pair_distance_pdf(r, r_l: float):
    """Density of the distance between two independent uniform points on the
    r_l disc; zero outside [0, 2 r_l]."""
    if r_l <= 0:
        raise ValueError("r_l must be positive")
    r = np.asarray(r, dtype=float)
    inside = (r >= 0) & (r <= 2 * r_l)
    rc = np.where(inside, r, 0.0)
    val = (2 * rc / r_l**2) * (
        (2 / np.pi) * np.arccos(rc / (2 * r_l))
        - (rc / (np.pi * r_l)) * np.sqrt(np.maximum(0.0, 1 - rc**2 / (4 * r_l**2)))
    )
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


_PAIR_TABLE_SIZE = 8193
_pair_cdf_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}


def _pair_inverse_cdf_table(r_l: float) -> tuple[np.ndarray, np.ndarray]:
    tab = _pair_cdf_cache.get(r_l)
    if tab is None:
        grid = np.linspace(0.0, 2 * r_l, _PAIR_TABLE_SIZE)
        cdf = _sci_integrate.cumulative_trapezoid(pair_distance_pdf(grid, r_l),
                                                  grid, initial=0.0)
        cdf /= cdf[-1]
        _pair_cdf_cache[r_l] = tab = (grid, cdf)
    return tab


def sample_pair_link(config: PairConfig, geometry: NetworkGeometry,
                     rng: np.random.Generator, size: int | None = None):
    """Draw (d_mn, |g_mn|^2): inter-user distance from the disc pair law by
    inverse CDF, fade exponential with rate lambda_mn."""
    grid, cdf = _pair_inverse_cdf_table(geometry.r_l)
    u = rng.random(size)
    d = np.interp(u, cdf, grid)
    fade = rng.standard_exponential(size) / config.lambda_mn
    if size is None:
        return float(d), float(fade)
    return d, fade


def _eve_region(geometry: NetworkGeometry, mode: SamplingMode, phase: str):
    """Outer radius, inner cut and center tag for the eavesdropper PPP."""
    if phase not in (PHASE1_FROM_BS, PHASE2_FROM_STRONG_USER):
        raise ValueError(f"unknown phase {phase!r}")
    if mode.kind == PAPER_GEOMETRY:
        return geometry.r_e, geometry.r_l, "bs"
    if phase == PHASE1_FROM_BS:
        return mode.r_max(geometry), geometry.r_p, "bs"
    return mode.r_max(geometry), 0.0, "user"


def sample_eavesdroppers(geometry: NetworkGeometry, mode: SamplingMode,
                         phase: str, strong_user_xy,
                         rng: np.random.Generator) -> EavesdropperSet:
    """Draw one world's eavesdropper PPP for the given phase.

    Points are generated on the enclosing disc and restricted to the target
    annulus (restriction of a PPP is a PPP), which keeps the consumed draw
    count independent of the inner radius so that sweeps over r_p stay
    coupled under common random numbers. Each point carries independent
    unit-mean exponential fades toward the BS and toward the strong user.
    """
    r_out, r_in, center = _eve_region(geometry, mode, phase)
    if center == "user" and strong_user_xy is None:
        raise ValueError("phase-2 sampling needs the strong user position")
    k = rng.poisson(geometry.lambda_e * np.pi * r_out**2)
    radii = r_out * np.sqrt(rng.random(k))
    ang = rng.random(k) * (2 * np.pi)
    g_bs = rng.standard_exponential(k)
    g_m = rng.standard_exponential(k)
    if r_in > 0:
        keep = radii >= r_in
        radii, ang = radii[keep], ang[keep]
        g_bs, g_m = g_bs[keep], g_m[keep]
    x = radii * np.cos(ang)
    y = radii * np.sin(ang)
    if center == "bs":
        d_bs = radii
        if strong_user_xy is None:
            d_m = np.full_like(radii, np.nan)
        else:
            d_m = np.hypot(x - strong_user_xy[0], y - strong_user_xy[1])
    else:
        d_m = radii
        d_bs = np.hypot(x + strong_user_xy[0], y + strong_user_xy[1])
    return EavesdropperSet(d_bs=d_bs, d_m=d_m, g_bs=g_bs, g_m=g_m)


def max_bs_link_gain(eves: EavesdropperSet, alpha: float) -> float:
    """Largest |h_e|^2 over the point set; 0 for an empty set."""
    if len(eves) == 0:
        return 0.0
    return float((eves.g_bs / (1.0 + eves.d_bs**alpha)).max())


def max_strong_user_link_gain(eves: EavesdropperSet, alpha: float) -> float:
    """Largest |g~_{m,e}|^2 over the point set; 0 for an empty set."""
    if len(eves) == 0:
        return 0.0
    return float((eves.g_m / (1.0 + eves.d_m**alpha)).max())


def sample_realization(geometry: NetworkGeometry, config: PairConfig,
                       mode: SamplingMode, master_seed: int,
                       trial_index: int,
                       phase: str = PHASE1_FROM_BS) -> ChannelRealization:
    """Assemble one full ChannelRealization from the per-trial lanes."""
    gains, xy = sample_user_channels(
        geometry, config, trial_rng(master_seed, trial_index, LANE_USERS),
        mode, return_positions=True)
    d_mn, fade = sample_pair_link(
        config, geometry, trial_rng(master_seed, trial_index, LANE_PAIR))
    eves = sample_eavesdroppers(
        geometry, mode, phase, xy[config.m - 1],
        trial_rng(master_seed, trial_index, LANE_EVES))
    return ChannelRealization(ordered_user_gains=gains, d_mn=d_mn,
                              pair_fade=fade, eavesdroppers=eves)
