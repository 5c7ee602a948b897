"""Event-level Monte Carlo of the two-phase secure NOMA protocol.

Each trial samples one world through the per-trial Philox lanes and scores
the scenario's outage event. Trials are independent work items; aggregation
is a pure count sum, so any parallel schedule produces identical estimates.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .geometry import (LANE_EVES, LANE_PAIR, LANE_USERS, PHASE1_FROM_BS,
                       PHASE2_FROM_STRONG_USER, NetworkGeometry, PairConfig,
                       SamplingMode, TrialStreams, max_bs_link_gain,
                       max_strong_user_link_gain, sample_eavesdroppers,
                       sample_pair_link, sample_user_channels, trial_rng)

CASE1 = "case1"
CASE2_RELAY = "case2_relay"
CASE2_FJR = "case2_fjr"
NONCOOP_NOMA = "noncoop_noma"
COOP_NO_EVES = "coop_no_eves"

_SCENARIOS = (CASE1, CASE2_RELAY, CASE2_FJR, NONCOOP_NOMA, COOP_NO_EVES)
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class TrialSpec:
    """Everything a single trial needs to sample and score one world."""

    config: PairConfig
    geometry: NetworkGeometry
    mode: SamplingMode
    scenario: str = CASE1
    high_snr_proxy: bool = True

    def __post_init__(self):
        if self.scenario not in _SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.scenario in (CASE1, COOP_NO_EVES) \
                and self.config.rate_n > self.config.rate_m:
            raise ValueError("case-1 scenarios require rate_n <= rate_m")


@dataclass(frozen=True)
class SopMonteCarlo:
    """Outage frequency with its binomial standard error."""

    outage_count: int
    n_trials: int
    estimate: float
    stderr: float
    master_seed: int

    @classmethod
    def from_count(cls, count: int, n_trials: int,
                   master_seed: int) -> "SopMonteCarlo":
        p = count / n_trials
        return cls(outage_count=count, n_trials=n_trials, estimate=p,
                   stderr=math.sqrt(p * (1.0 - p) / n_trials),
                   master_seed=master_seed)


def _sinr_own(h: float, a_sig_sq: float, a_int_sq: float, p_bs: float) -> float:
    return h * a_sig_sq / (h * a_int_sq + 1.0 / p_bs)


def _case1_events(spec: TrialSpec, streams, trial_index: int,
                  master_seed: int, with_eves: bool = True):
    """(E1, E2, E3, E4) flags for one world; lanes consumed in order."""
    cfg, geo = spec.config, spec.geometry
    gains = sample_user_channels(
        geo, cfg, streams(master_seed, trial_index, LANE_USERS), spec.mode)
    h_n, h_m = gains[cfg.n - 1], gains[cfg.m - 1]
    d_mn, fade = sample_pair_link(
        cfg, geo, streams(master_seed, trial_index, LANE_PAIR))
    if with_eves:
        eves = sample_eavesdroppers(
            geo, spec.mode, PHASE1_FROM_BS, None,
            streams(master_seed, trial_index, LANE_EVES))
        gamma_e = cfg.a_m_sq * cfg.p_bs * max_bs_link_gain(eves, geo.alpha)
    else:
        gamma_e = 0.0
    gamma_m = cfg.a_m_sq * cfg.p_bs * h_m
    gamma_m_n1 = _sinr_own(h_m, cfg.a_n_sq, cfg.a_m_sq, cfg.p_bs)
    gamma_n_n1 = _sinr_own(h_n, cfg.a_n_sq, cfg.a_m_sq, cfg.p_bs)
    gamma_n_n2 = cfg.p_c * fade / (1.0 + d_mn**geo.alpha)
    gamma_n = gamma_n_n1 + min(gamma_n_n2, gamma_m_n1)
    gate_n = 2.0 ** (2 * cfg.rate_n)
    gate_m = 2.0 ** (2 * cfg.rate_m)
    e1 = 1.0 + gamma_m_n1 >= gate_n
    e2 = 1.0 + gamma_m >= gate_m * (1.0 + gamma_e)
    e3 = 1.0 + gamma_n >= gate_n
    e4 = 1.0 + gamma_n_n1 + gamma_n_n2 >= gate_n
    return e1, e2, e3, e4


def _fjr_sinr(link_gain: float, beta: float, p_c: float) -> float:
    if beta >= 1.0:
        return p_c * link_gain
    return beta * p_c * link_gain / (1.0 + (1.0 - beta) * p_c * link_gain)


def _case2_outage(spec: TrialSpec, streams, trial_index: int,
                  master_seed: int) -> bool:
    cfg, geo = spec.config, spec.geometry
    gains, xy = sample_user_channels(
        geo, cfg, streams(master_seed, trial_index, LANE_USERS), spec.mode,
        return_positions=True)
    d_mn, fade = sample_pair_link(
        cfg, geo, streams(master_seed, trial_index, LANE_PAIR))
    eves = sample_eavesdroppers(
        geo, spec.mode, PHASE2_FROM_STRONG_USER, xy[cfg.m - 1],
        streams(master_seed, trial_index, LANE_EVES))
    beta = cfg.beta if spec.scenario == CASE2_FJR else 1.0
    link_n = fade / (1.0 + d_mn**geo.alpha)
    gamma_n_t = _fjr_sinr(link_n, beta, cfg.p_c)
    gate_n = 2.0 ** (2 * cfg.rate_n)
    theta = cfg.theta
    if spec.high_snr_proxy:
        # SINR of the strongest eavesdropper; the monotone beta-split lets us
        # take the max over raw link gains first
        gamma_e_t = _fjr_sinr(max_strong_user_link_gain(eves, geo.alpha),
                              beta, cfg.p_c)
        lhs = 1.0 + theta + min(gamma_n_t, theta)
        rhs = 1.0 + theta + min(gamma_e_t, theta)
        return lhs < gate_n * rhs
    # finite-power sanity mode: full two-phase MRC at the weak user and at
    # every eavesdropper before the max
    h_n, h_m = gains[cfg.n - 1], gains[cfg.m - 1]
    gamma_m_n1 = _sinr_own(h_m, cfg.a_n_sq, cfg.a_m_sq, cfg.p_bs)
    gamma_n_n1 = _sinr_own(h_n, cfg.a_n_sq, cfg.a_m_sq, cfg.p_bs)
    gamma_n = gamma_n_n1 + min(gamma_n_t, gamma_m_n1)
    if len(eves):
        h_e = eves.g_bs / (1.0 + eves.d_bs**geo.alpha)
        gamma_e_1 = h_e * cfg.a_n_sq / (h_e * cfg.a_m_sq + 1.0 / cfg.p_bs)
        link_e = eves.g_m / (1.0 + eves.d_m**geo.alpha)
        if beta >= 1.0:
            gamma_e_2 = cfg.p_c * link_e
        else:
            gamma_e_2 = (beta * cfg.p_c * link_e
                         / (1.0 + (1.0 - beta) * cfg.p_c * link_e))
        gamma_e = float((gamma_e_1 + np.minimum(gamma_e_2, gamma_m_n1)).max())
    else:
        gamma_e = 0.0
    return 1.0 + gamma_n < gate_n * (1.0 + gamma_e)


def _noncoop_outage(spec: TrialSpec, streams, trial_index: int,
                    master_seed: int) -> bool:
    """Single-phase NOMA baseline: full-rate thresholds, no combining."""
    cfg, geo = spec.config, spec.geometry
    gains = sample_user_channels(
        geo, cfg, streams(master_seed, trial_index, LANE_USERS), spec.mode)
    h_n, h_m = gains[cfg.n - 1], gains[cfg.m - 1]
    eves = sample_eavesdroppers(
        geo, spec.mode, PHASE1_FROM_BS, None,
        streams(master_seed, trial_index, LANE_EVES))
    gamma_e = cfg.a_m_sq * cfg.p_bs * max_bs_link_gain(eves, geo.alpha)
    gamma_m = cfg.a_m_sq * cfg.p_bs * h_m
    gamma_m_n1 = _sinr_own(h_m, cfg.a_n_sq, cfg.a_m_sq, cfg.p_bs)
    gamma_n_n1 = _sinr_own(h_n, cfg.a_n_sq, cfg.a_m_sq, cfg.p_bs)
    sic_ok = 1.0 + gamma_m_n1 >= 2.0**cfg.rate_n
    secure_ok = 1.0 + gamma_m >= 2.0**cfg.rate_m * (1.0 + gamma_e)
    weak_ok = 1.0 + gamma_n_n1 >= 2.0**cfg.rate_n
    return not (sic_ok and secure_ok and weak_ok)


def _outage(spec: TrialSpec, streams, trial_index: int,
            master_seed: int) -> bool:
    if spec.scenario == CASE1:
        e1, e2, e3, _ = _case1_events(spec, streams, trial_index, master_seed)
        return not (e1 and e2 and e3)
    if spec.scenario == COOP_NO_EVES:
        e1, e2, e3, _ = _case1_events(spec, streams, trial_index, master_seed,
                                      with_eves=False)
        return not (e1 and e2 and e3)
    if spec.scenario in (CASE2_RELAY, CASE2_FJR):
        return _case2_outage(spec, streams, trial_index, master_seed)
    return _noncoop_outage(spec, streams, trial_index, master_seed)


def run_trial_case1(spec: TrialSpec, trial_index: int,
                    master_seed: int = 0) -> bool:
    """Score one case-1 world; True means secrecy outage."""
    e1, e2, e3, _ = case1_events(spec, trial_index, master_seed)
    return not (e1 and e2 and e3)


def case1_events(spec: TrialSpec, trial_index: int, master_seed: int = 0):
    """The (E1, E2, E3, E4) event flags of one case-1 world."""
    return _case1_events(spec, trial_rng, trial_index, master_seed,
                         with_eves=spec.scenario != COOP_NO_EVES)


def run_trial_case2(spec: TrialSpec, trial_index: int,
                    master_seed: int = 0) -> bool:
    """Score one case-2 world (weak-user secrecy outage)."""
    if spec.scenario not in (CASE2_RELAY, CASE2_FJR):
        raise ValueError("spec.scenario must be a case-2 scenario")
    return _case2_outage(spec, trial_rng, trial_index, master_seed)


def run_trial_noncoop(spec: TrialSpec, trial_index: int,
                      master_seed: int = 0) -> bool:
    """Score one single-phase baseline world."""
    return _noncoop_outage(spec, trial_rng, trial_index, master_seed)


def run_trial(spec: TrialSpec, trial_index: int, master_seed: int = 0) -> bool:
    """Score one world of whatever scenario the spec selects."""
    return _outage(spec, trial_rng, trial_index, master_seed)


def _count_range(spec: TrialSpec, master_seed: int, start: int,
                 stop: int) -> int:
    streams = TrialStreams()
    outage = _outage
    return sum(outage(spec, streams.get, i, master_seed)
               for i in range(start, stop))


def estimate_sop(spec: TrialSpec, n_trials: int, master_seed: int,
                 workers: int = 1) -> SopMonteCarlo:
    """Monte Carlo SOP over n_trials per-trial streams.

    The count is a permutation-invariant sum, so the estimate is identical
    for any worker count or chunking.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if workers <= 1 or n_trials < 4 * workers:
        count = _count_range(spec, master_seed, 0, n_trials)
    else:
        bounds = np.linspace(0, n_trials, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_count_range, spec, master_seed, a, b)
                       for a, b in zip(bounds[:-1], bounds[1:])]
            count = sum(f.result() for f in futures)
    return SopMonteCarlo.from_count(count, n_trials, master_seed)


def case1_event_rates(spec: TrialSpec, n_trials: int,
                      master_seed: int) -> dict:
    """Frequencies of the case-1 outage and of the complements of E2/E4.

    One sampling pass feeds all the analytic-vs-MC comparisons that share
    the case-1 world.
    """
    if spec.scenario != CASE1:
        raise ValueError("case1_event_rates needs a case-1 spec")
    streams = TrialStreams()
    outage = e2_bar = e4_bar = 0
    for i in range(n_trials):
        e1, e2, e3, e4 = _case1_events(spec, streams.get, i, master_seed)
        outage += not (e1 and e2 and e3)
        e2_bar += not e2
        e4_bar += not e4
    return {
        "sop": SopMonteCarlo.from_count(outage, n_trials, master_seed),
        "e2_bar": SopMonteCarlo.from_count(e2_bar, n_trials, master_seed),
        "e4_bar": SopMonteCarlo.from_count(e4_bar, n_trials, master_seed),
    }


def no_eves_spec(spec: TrialSpec) -> TrialSpec:
    """The same scenario with the eavesdropper process switched off."""
    return replace(spec, scenario=COOP_NO_EVES,
                   geometry=replace(spec.geometry, lambda_e=0.0))


class EmpiricalCdf:
    """Right-continuous empirical CDF with a one-sample KS distance."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.size == 0:
            raise ValueError("empirical CDF needs at least one sample")
        self.sorted = np.sort(samples)
        self.n = samples.size

    def __call__(self, x):
        idx = np.searchsorted(self.sorted, np.asarray(x, dtype=float),
                              side="right")
        out = idx / self.n
        return float(out) if out.ndim == 0 else out

    def ks_distance(self, cdf) -> float:
        """sup-norm distance against a reference CDF callable."""
        ref = np.asarray(cdf(self.sorted), dtype=float)
        steps_hi = np.arange(1, self.n + 1) / self.n
        steps_lo = np.arange(0, self.n) / self.n
        return float(np.maximum(np.abs(ref - steps_hi),
                                np.abs(ref - steps_lo)).max())


def empirical_cdf(samples) -> EmpiricalCdf:
    """Build the empirical CDF of a nonempty sample list."""
    return EmpiricalCdf(samples)
