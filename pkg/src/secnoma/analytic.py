"""Closed-form CDFs, PDFs and secrecy outage probabilities.

The quadrature coefficient families turn the distance-averaged Laplace
integrals into finite exponential sums; ordered-gain CDFs expand the
order-statistic power through explicit multinomial compositions. Outer
integrals are evaluated numerically with scale hints at the distribution's
own mass scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .geometry import NetworkGeometry, PairConfig
from .specfun import (ChebyshevScheme, chebyshev_scheme, gamma_fn,
                      integrate_finite, integrate_semi_infinite,
                      upper_incomplete_gamma)

RELAY = "relay"
FJR = "fjr"

ANALYTIC_EXACT = "analytic_exact"
ANALYTIC_LOWER_BOUND = "analytic_lower_bound"
ANALYTIC_UPPER_BOUND = "analytic_upper_bound"
MONTE_CARLO = "monte_carlo"

_CLAMP_EPS = 1e-6
_EXP_UNDERFLOW = 500.0  # exponent above which guarded products are flushed to 0
_DEFAULT_MAX_USERS = 10


class QuadratureAccuracyWarning(UserWarning):
    """Raw quadrature CDF value left [-eps, 1+eps] before clamping."""


@dataclass(frozen=True)
class SopEstimate:
    """A point SOP value with provenance."""

    value: float
    kind: str
    stderr: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"SOP value outside [0, 1]: {self.value}")
        if (self.stderr is not None) != (self.kind == MONTE_CARLO):
            raise ValueError("stderr present iff kind is monte_carlo")


@dataclass(frozen=True)
class DerivedScalars:
    """Scalars shared by the closed forms (all powers linear, noise = 1)."""

    eta: float
    mu1: float
    mu2: float
    chi1: float
    chi2: float
    theta: float
    c_n_g: float
    zeta: float

    @classmethod
    def from_model(cls, geometry: NetworkGeometry,
                   config: PairConfig) -> "DerivedScalars":
        eta = geometry.eta
        lam = geometry.lambda_e
        theta = config.theta
        c_n_g = 2.0 ** (2 * config.rate_n)
        return cls(
            eta=eta,
            mu1=eta * np.pi * lam * (config.p_bs * config.a_m_sq) ** eta,
            mu2=geometry.r_p**geometry.alpha / (config.p_bs * config.a_m_sq),
            chi1=np.pi * eta * lam * config.p_c**eta if config.p_c > 0 else 0.0,
            chi2=np.pi * eta * gamma_fn(eta) * lam,
            theta=theta,
            c_n_g=c_n_g,
            zeta=(c_n_g - 1.0) * (1.0 + theta),
        )


def _clamp_probability(raw, context: str):
    arr = np.asarray(raw, dtype=float)
    if np.any(arr < -_CLAMP_EPS) or np.any(arr > 1.0 + _CLAMP_EPS):
        worst = arr.min() if arr.min() < -_CLAMP_EPS else arr.max()
        warnings.warn(
            f"{context}: raw value {worst:.3e} outside [-{_CLAMP_EPS:g}, "
            f"1+{_CLAMP_EPS:g}]; increase the quadrature order",
            QuadratureAccuracyWarning, stacklevel=3)
    out = np.clip(arr, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


class OrderedGainCdf:
    """CDF of the order_index-th smallest user gain |h|^2, quadrature form.

    The order-statistic power F^(m+p) is expanded over explicit integer
    compositions of m+p into N+1 parts, flattened once into (coefficient,
    decay-rate) arrays; evaluation is then a single dot product.
    """

    def __init__(self, bvec: np.ndarray, cvec: np.ndarray, n_l: int,
                 order_index: int, max_users: int = _DEFAULT_MAX_USERS):
        if not 1 <= order_index <= n_l:
            raise ValueError(
                f"order index must lie in [1, n_l], got {order_index}")
        if n_l > max_users:
            raise ValueError(
                f"combinatorial blowup: n_l={n_l} exceeds the supported cap "
                f"of {max_users}; the multinomial expansion over "
                f"compositions grows as C(n_l+N, N)")
        self.n_l = n_l
        self.order_index = order_index
        idx = order_index
        phi_idx = math.factorial(n_l) // (
            math.factorial(n_l - idx) * math.factorial(idx - 1))
        coeffs: list[float] = []
        rates: list[float] = []
        nterms = len(bvec)
        for p in range(n_l - idx + 1):
            prefactor = phi_idx * math.comb(n_l - idx, p) * (-1) ** p / (idx + p)
            mp = idx + p
            fact_mp = math.factorial(mp)
            for combo in combinations_with_replacement(range(nterms), mp):
                mult = fact_mp
                coeff = 1.0
                rate = 0.0
                run = 1
                prev = combo[0]
                coeff *= bvec[prev]
                rate += cvec[prev]
                for kk in combo[1:]:
                    coeff *= bvec[kk]
                    rate += cvec[kk]
                    if kk == prev:
                        run += 1
                        mult //= run
                    else:
                        run = 1
                        prev = kk
                coeffs.append(prefactor * mult * coeff)
                rates.append(rate)
        self._coeffs = np.asarray(coeffs)
        self._rates = np.asarray(rates)

    def __call__(self, z):
        """Evaluate at channel-gain threshold z >= 0 (scalar or array)."""
        z = np.asarray(z, dtype=float)
        raw = np.exp(-np.multiply.outer(z, self._rates)) @ self._coeffs
        return _clamp_probability(raw, "ordered_gain_cdf")


@dataclass
class QuadratureConstants:
    """Gauss-Chebyshev coefficient families for the distance averages.

    b/c average over the user disc (index 0 carries the balancing b_0 and
    c_0 = 0); B/C average over the inter-user distance law. Immutable after
    construction and shareable across workers.
    """

    scheme: ChebyshevScheme
    r_l: float
    alpha: float
    b: np.ndarray
    c: np.ndarray
    B: np.ndarray
    C: np.ndarray
    _ordered_cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, geometry: NetworkGeometry,
              order: int = 20) -> "QuadratureConstants":
        scheme = chebyshev_scheme(order)
        phi = scheme.nodes
        w = scheme.weight
        r_l, alpha = geometry.r_l, geometry.alpha

        bk = -(w / 2) * np.sqrt(1 - phi**2) * (phi + 1)
        b = np.concatenate(([-bk.sum()], bk))
        c = np.concatenate(([0.0], 1 + (r_l / 2 * (phi + 1)) ** alpha))

        half = (1 + phi) / 2
        bigb = -w * np.sqrt(1 - phi**2) * (1 + phi) * (
            2 * np.arccos(half) - (1 + phi) * np.sqrt(1 - half**2))
        B = np.concatenate(([-bigb.sum()], bigb))
        C = np.concatenate(([0.0], 1 + (r_l + r_l * phi) ** alpha))
        for arr in (b, c, B, C):
            arr.setflags(write=False)
        return cls(scheme=scheme, r_l=r_l, alpha=alpha, b=b, c=c, B=B, C=C)

    def ordered_gain_cdf(self, n_l: int, order_index: int,
                         max_users: int = _DEFAULT_MAX_USERS) -> OrderedGainCdf:
        key = (n_l, order_index)
        if key not in self._ordered_cache:
            self._ordered_cache[key] = OrderedGainCdf(
                self.b, self.c, n_l, order_index, max_users=max_users)
        return self._ordered_cache[key]


# ---------------------------------------------------------------------------
# phase-1 eavesdropper SNR (max over the PPP, BS links)
# ---------------------------------------------------------------------------

def cdf_eve_snr_phase1(x, scalars: DerivedScalars, p_bs: float, a_m: float):
    """CDF of the strongest eavesdropper SNR on the direct phase."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("cdf_eve_snr_phase1 requires x > 0")
    scale = p_bs * a_m**2
    g = upper_incomplete_gamma(scalars.eta, scalars.mu2 * x)
    out = np.exp(-scalars.mu1 * np.exp(-x / scale) * g / x**scalars.eta)
    return float(out) if out.ndim == 0 else out


def pdf_eve_snr_phase1(x, scalars: DerivedScalars, p_bs: float, a_m: float):
    """Density of the strongest phase-1 eavesdropper SNR."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("pdf_eve_snr_phase1 requires x > 0")
    eta, mu1, mu2 = scalars.eta, scalars.mu1, scalars.mu2
    scale = p_bs * a_m**2
    g = upper_incomplete_gamma(eta, mu2 * x)
    damp = np.exp(-x / scale)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        a_exp = mu1 * damp * g / x**eta
        bracket = (mu2**eta * np.exp(-mu2 * x) / x
                   + eta * g / x ** (eta + 1)
                   + g / (scale * x**eta))
        out = mu1 * damp * np.exp(-a_exp) * bracket
        out = np.where(a_exp > _EXP_UNDERFLOW, 0.0, out)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# ordered user gains and the strong-user outage integral
# ---------------------------------------------------------------------------

def cdf_ordered_user_gain_snr(y, order_index: int,
                              constants: QuadratureConstants,
                              config: PairConfig):
    """CDF of the order-index-th smallest user's phase-1 SNR at threshold y.

    This is the base CDF in y; callers compose y = 2^(2 R_m) (1 + x) - 1 to
    turn it into the secrecy threshold.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("SNR threshold must be nonnegative")
    base = constants.ordered_gain_cdf(config.n_l, order_index)
    return base(y / (config.p_bs * config.a_m_sq))


def pr_secrecy_outage_strong(config: PairConfig, geometry: NetworkGeometry,
                             constants: QuadratureConstants,
                             abs_tol: float = 1e-8) -> float:
    """Pr that the strong user fails to decode its own message securely.

    Averages the ordered-gain CDF at the secrecy threshold over the phase-1
    eavesdropper SNR density. Degenerates to the plain CDF when there are no
    eavesdroppers.
    """
    scalars = DerivedScalars.from_model(geometry, config)
    gate = 2.0 ** (2 * config.rate_m)
    if scalars.mu1 == 0.0:
        return float(cdf_ordered_user_gain_snr(gate - 1.0, config.m,
                                               constants, config))
    base = constants.ordered_gain_cdf(config.n_l, config.m)
    scale = config.p_bs * config.a_m_sq

    def integrand(x):
        return (pdf_eve_snr_phase1(x, scalars, config.p_bs, config.a_m)
                * base((gate * (1.0 + x) - 1.0) / scale))

    x0 = (scalars.mu1 * gamma_fn(scalars.eta)) ** (1.0 / scalars.eta)
    points = [x0 * 10.0**j for j in range(-3, 4)]
    val = integrate_semi_infinite(integrand, abs_tol, points=points)
    return float(np.clip(val, 0.0, 1.0))


def cdf_weak_user_phase1_sinr(x, constants: QuadratureConstants,
                              config: PairConfig):
    """CDF of the weak user's own phase-1 SINR; 1 above the ceiling theta."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("SINR threshold must be nonnegative")
    theta = config.theta
    base = constants.ordered_gain_cdf(config.n_l, config.n)
    below = x < theta
    xs = np.where(below, x, 0.0)
    z = xs / ((config.a_n_sq - config.a_m_sq * xs) * config.p_bs)
    out = np.where(below, base(z), 1.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# cooperation-phase link of the weak user
# ---------------------------------------------------------------------------

def cdf_coop_link_snr(y, constants: QuadratureConstants, config: PairConfig):
    """CDF of the relayed-link SNR P_C |g~_{m,n}|^2, quadrature form."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("SNR threshold must be nonnegative")
    rate = constants.C * (config.lambda_mn / config.p_c)
    raw = (2 / np.pi) * (np.exp(-np.multiply.outer(y, rate)) @ constants.B)
    return _clamp_probability(raw, "cdf_coop_link_snr")


def pdf_coop_link_snr(y, constants: QuadratureConstants, config: PairConfig):
    """Density matching cdf_coop_link_snr (exact derivative of the sum)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("SNR threshold must be nonnegative")
    lam_over_pc = config.lambda_mn / config.p_c
    bk = constants.B[1:]
    ck = constants.C[1:]
    out = (-2 * lam_over_pc / np.pi) * (
        np.exp(-np.multiply.outer(y, ck * lam_over_pc)) @ (bk * ck))
    return float(out) if out.ndim == 0 else out


def pr_E4_bar(config: PairConfig, constants: QuadratureConstants,
              abs_tol: float = 1e-8) -> float:
    """Pr that direct-plus-relayed combining at the weak user misses R_n.

    The CDF factor vanishes for negative arguments, so the support is the
    finite interval [0, 2^(2 R_n) - 1]; a breakpoint at the relay-link decay
    scale keeps the quadrature honest when P_C is very small.
    """
    thr = 2.0 ** (2 * config.rate_n) - 1.0
    if thr <= 0:
        return 0.0

    def integrand(x):
        return (pdf_coop_link_snr(x, constants, config)
                * cdf_weak_user_phase1_sinr(thr - x, constants, config))

    scale = config.p_c / config.lambda_mn
    points = [scale * 10.0**j for j in range(-1, 3)]
    val = integrate_finite(integrand, 0.0, thr, abs_tol, points=points)
    return float(np.clip(val, 0.0, 1.0))


def sop_case1(config: PairConfig, geometry: NetworkGeometry,
              constants: QuadratureConstants,
              abs_tol: float = 1e-8) -> SopEstimate:
    """System SOP with secrecy required at the strong user only.

    Exact when a_m^2 <= 1/(2^(2 R_n)+1); a lower bound up to 1/2^(2 R_n);
    identically 1 beyond that (the strong user can never complete SIC).
    """
    if config.rate_n > config.rate_m:
        raise ValueError(
            f"case 1 requires rate_n <= rate_m, got rate_n={config.rate_n}, "
            f"rate_m={config.rate_m}")
    gate_n = 2.0 ** (2 * config.rate_n)
    meta = {"abs_tol": abs_tol, "quadrature_order": constants.scheme.order}
    if config.a_m_sq > 1.0 / gate_n:
        return SopEstimate(1.0, ANALYTIC_EXACT, metadata=meta)
    e2_bar = pr_secrecy_outage_strong(config, geometry, constants, abs_tol)
    e4_bar = pr_E4_bar(config, constants, abs_tol)
    value = float(np.clip(1.0 - (1.0 - e4_bar) * (1.0 - e2_bar), 0.0, 1.0))
    kind = (ANALYTIC_EXACT if config.a_m_sq <= 1.0 / (gate_n + 1.0)
            else ANALYTIC_LOWER_BOUND)
    meta.update(pr_e2_bar=e2_bar, pr_e4_bar=e4_bar)
    return SopEstimate(value, kind, metadata=meta)


# ---------------------------------------------------------------------------
# cooperation-phase eavesdroppers (high-SNR case)
# ---------------------------------------------------------------------------

def cdf_eve_coop_relay(x, scalars: DerivedScalars, p_c: float):
    """CDF of the strongest eavesdropper SNR on the relayed phase."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("cdf_eve_coop_relay requires x > 0")
    out = np.exp(-scalars.chi1 * np.exp(-x / p_c) * gamma_fn(scalars.eta)
                 / x**scalars.eta)
    return float(out) if out.ndim == 0 else out


def pdf_eve_coop_relay(x, scalars: DerivedScalars, p_c: float):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("pdf_eve_coop_relay requires x > 0")
    eta, chi1 = scalars.eta, scalars.chi1
    gam = gamma_fn(eta)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        a_exp = chi1 * np.exp(-x / p_c) * gam / x**eta
        out = chi1 * gam * np.exp(-(a_exp + x / p_c)) * (
            eta / x ** (eta + 1) + 1.0 / (p_c * x**eta))
        out = np.where(a_exp > _EXP_UNDERFLOW, 0.0, out)
    return float(out) if out.ndim == 0 else out


def _fjr_ceiling(beta: float) -> float:
    return np.inf if beta >= 1.0 else beta / (1.0 - beta)


def cdf_eve_coop_fjr(x, beta: float, scalars: DerivedScalars, p_c: float):
    """CDF of the strongest eavesdropper SINR under the friendly-jammer split.

    The SINR is capped at beta/(1-beta); beta = 1 is the no-jamming limit and
    coincides with the relay-phase law.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("cdf_eve_coop_fjr requires x > 0")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    ceiling = _fjr_ceiling(beta)
    below = x < ceiling
    xs = np.where(below, x, 1.0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        d = beta * p_c - (1 - beta) * p_c * xs
        s = xs / d
        val = np.exp(-scalars.chi2 * np.exp(-s) * (d / xs) ** scalars.eta)
    out = np.where(below, val, 1.0)
    return float(out) if out.ndim == 0 else out


def pdf_eve_coop_fjr(x, beta: float, scalars: DerivedScalars, p_c: float):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("pdf_eve_coop_fjr requires x > 0")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    eta, chi2 = scalars.eta, scalars.chi2
    ceiling = _fjr_ceiling(beta)
    below = x < ceiling
    xs = np.where(below, x, 1.0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        d = beta * p_c - (1 - beta) * p_c * xs
        s = xs / d
        a_exp = chi2 * np.exp(-s) * (d / xs) ** eta
        val = chi2 * beta * p_c * np.exp(-(s + a_exp)) * (
            d ** (eta - 2) / xs**eta + eta * d ** (eta - 1) / xs ** (eta + 1))
        val = np.where((s > _EXP_UNDERFLOW) | (a_exp > _EXP_UNDERFLOW), 0.0, val)
    out = np.where(below, val, 0.0)
    return float(out) if out.ndim == 0 else out


def cdf_weak_coop_fjr(x, beta: float, constants: QuadratureConstants,
                      config: PairConfig):
    """CDF of the weak user's jammed relay-link SINR; 1 above the ceiling."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("SINR threshold must be nonnegative")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    ceiling = _fjr_ceiling(beta)
    below = x < ceiling
    xs = np.where(below, x, 0.0)
    den = config.p_c * (beta - (1 - beta) * xs)
    rate = np.multiply.outer(xs / den, constants.C * config.lambda_mn)
    raw = (2 / np.pi) * (np.exp(-rate) @ constants.B)
    out = np.where(below, _clamp_probability(raw, "cdf_weak_coop_fjr"), 1.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# high-SNR weak-user SOP and its composition
# ---------------------------------------------------------------------------

def sop_weak_high_snr(config: PairConfig, geometry: NetworkGeometry,
                      constants: QuadratureConstants, strategy: str,
                      abs_tol: float = 1e-8) -> SopEstimate:
    """Weak-user SOP in the limit of unbounded BS power.

    Returns 1 exactly when theta <= zeta; otherwise evaluates the tail-plus-
    integral form with the (F, f) pair selected by the strategy. Reported as
    an upper bound, matching how the high-SNR result is stated.
    """
    if strategy not in (RELAY, FJR):
        raise ValueError(f"unknown strategy {strategy!r}")
    scalars = DerivedScalars.from_model(geometry, config)
    theta, zeta, gate = scalars.theta, scalars.zeta, scalars.c_n_g
    meta = {"abs_tol": abs_tol, "strategy": strategy,
            "quadrature_order": constants.scheme.order}
    if theta <= zeta:
        return SopEstimate(1.0, ANALYTIC_EXACT, metadata=meta)
    t_up = (theta - zeta) / gate
    p_c = config.p_c
    beta = config.beta if strategy == FJR else 1.0

    if strategy == RELAY:
        f_weak = lambda v: cdf_coop_link_snr(v, constants, config)
        f_eve = lambda v: cdf_eve_coop_relay(v, scalars, p_c)
        pdf_eve = lambda v: pdf_eve_coop_relay(v, scalars, p_c)
        x0 = (scalars.chi1 * gamma_fn(scalars.eta)) ** (1.0 / scalars.eta) \
            if scalars.chi1 > 0 else 0.0
        ceiling = np.inf
    else:
        f_weak = lambda v: cdf_weak_coop_fjr(v, beta, constants, config)
        f_eve = lambda v: cdf_eve_coop_fjr(v, beta, scalars, p_c)
        pdf_eve = lambda v: pdf_eve_coop_fjr(v, beta, scalars, p_c)
        x0 = beta * p_c * scalars.chi2 ** (1.0 / scalars.eta) \
            if scalars.chi2 > 0 else 0.0
        ceiling = _fjr_ceiling(beta)

    if geometry.lambda_e == 0.0:
        # degenerate eavesdropper at 0: SOP reduces to the weak-link CDF
        value = float(f_weak(zeta))
        return SopEstimate(value, ANALYTIC_UPPER_BOUND, metadata=meta)

    upper = min(t_up, ceiling)
    points = [min(max(x0 * 10.0**j, 1e-12), 0.999 * upper)
              for j in range(-2, 3)]
    integral = integrate_finite(
        lambda v: pdf_eve(v) * f_weak(zeta + gate * v),
        0.0, upper, abs_tol, points=points)
    value = float(np.clip(1.0 - f_eve(t_up) + integral, 0.0, 1.0))
    return SopEstimate(value, ANALYTIC_UPPER_BOUND, metadata=meta)


def sop_case2(config: PairConfig, geometry: NetworkGeometry,
              constants: QuadratureConstants, strategy: str,
              abs_tol: float = 1e-8) -> SopEstimate:
    """System SOP with secrecy at both users, high-SNR regime."""
    gate_n = 2.0 ** (2 * config.rate_n)
    if config.a_m_sq > 1.0 / gate_n:
        raise ValueError(
            f"case 2 requires a_m^2 <= 1/2^(2 rate_n) = {1.0 / gate_n:.4f} "
            f"so SIC succeeds at high SNR, got a_m^2 = {config.a_m_sq:.4f}")
    sop_m = pr_secrecy_outage_strong(config, geometry, constants, abs_tol)
    weak = sop_weak_high_snr(config, geometry, constants, strategy, abs_tol)
    value = float(np.clip(1.0 - (1.0 - sop_m) * (1.0 - weak.value), 0.0, 1.0))
    meta = {"abs_tol": abs_tol, "strategy": strategy, "sop_m": sop_m,
            "sop_n": weak.value}
    return SopEstimate(value, ANALYTIC_UPPER_BOUND, metadata=meta)
