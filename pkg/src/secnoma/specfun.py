"""Special functions, Chebyshev node generation, and guarded numerical integration.

Everything here is pure and stateless; all downstream closed-form evaluators
are built on these primitives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import special as _sci_special

_QUAD_LIMIT = 400


class IntegrationError(RuntimeError):
    """Adaptive quadrature exhausted its refinement budget above tolerance."""


def gamma_fn(s: float) -> float:
    """Gamma function for s > 0."""
    if s <= 0:
        raise ValueError(f"gamma_fn requires s > 0, got s={s}")
    return float(_sci_special.gamma(s))


def upper_incomplete_gamma(p: float, q) -> float:
    """Upper incomplete gamma: integral of t^(p-1) e^(-t) over [q, inf).

    Accepts a scalar or array q; reduces to gamma_fn(p) at q = 0.
    """
    if p <= 0:
        raise ValueError(f"upper_incomplete_gamma requires p > 0, got p={p}")
    if np.any(np.asarray(q) < 0):
        raise ValueError(f"upper_incomplete_gamma requires q >= 0, got q={q}")
    out = _sci_special.gammaincc(p, q) * _sci_special.gamma(p)
    return float(out) if np.isscalar(q) else out


def unit_step(x: float) -> int:
    """Heaviside step, closed at zero: 1 for x >= 0, else 0."""
    return 1 if x >= 0 else 0


@dataclass(frozen=True)
class ChebyshevScheme:
    """First-kind Chebyshev nodes cos((2k-1)pi/2N), k=1..N, with weight pi/N.

    Nodes are strictly decreasing and exactly antisymmetric:
    nodes[k] == -nodes[N-1-k].
    """

    order: int
    nodes: np.ndarray
    weight: float


def chebyshev_scheme(order: int) -> ChebyshevScheme:
    """Build the N-point Chebyshev node/weight set.

    The upper half of the node array is mirrored from the lower half so the
    antisymmetry (and the zero node for odd N) holds exactly in floating point.
    """
    if order < 1:
        raise ValueError(f"chebyshev_scheme requires order >= 1, got {order}")
    n = order
    k = np.arange(1, n + 1)
    nodes = np.cos((2 * k - 1) * np.pi / (2 * n))
    half = n // 2
    nodes[n - half:] = -nodes[:half][::-1]
    if n % 2:
        nodes[half] = 0.0
    nodes.setflags(write=False)
    return ChebyshevScheme(order=n, nodes=nodes, weight=np.pi / n)


def _finish(quad_result, abs_tol: float) -> float:
    value, abserr = quad_result[0], quad_result[1]
    # quad appends an explanation string only when it could not converge
    if len(quad_result) > 3 and abserr > abs_tol:
        raise IntegrationError(
            f"quadrature did not reach abs_tol={abs_tol:g} "
            f"(abserr={abserr:g}): {quad_result[3]}"
        )
    return value


def integrate_finite(f, a: float, b: float, abs_tol: float = 1e-8,
                     points=None) -> float:
    """Integrate f over [a, b] to within abs_tol.

    `points` marks interior locations where the integrand is concentrated or
    kinked (passed straight to the adaptive subdivision).
    """
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    if a > b:
        raise ValueError(f"integrate_finite requires a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    pts = None
    if points is not None:
        pts = sorted(p for p in points if a < p < b)
        if not pts:
            pts = None
    res = _sci_integrate.quad(f, a, b, epsabs=abs_tol, limit=_QUAD_LIMIT,
                              points=pts, full_output=1)
    return _finish(res, abs_tol)


def integrate_semi_infinite(f, abs_tol: float = 1e-8, points=None) -> float:
    """Integrate f over [0, inf) to within abs_tol.

    Without hints the interval is mapped to a finite one by quad's internal
    transformation. With `points`, the range is split at 10x the largest hint
    so that sharply localized mass near the origin is not missed.
    """
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    if points:
        pts = sorted(p for p in points if p > 0)
    else:
        pts = []
    if pts:
        split = 10.0 * pts[-1]
        inner = [p for p in pts if p < split]
        head = _sci_integrate.quad(f, 0.0, split, epsabs=abs_tol / 2,
                                   limit=_QUAD_LIMIT, points=inner,
                                   full_output=1)
        tail = _sci_integrate.quad(f, split, np.inf, epsabs=abs_tol / 2,
                                   limit=_QUAD_LIMIT, full_output=1)
        return _finish(head, abs_tol / 2) + _finish(tail, abs_tol / 2)
    res = _sci_integrate.quad(f, 0.0, np.inf, epsabs=abs_tol,
                              limit=_QUAD_LIMIT, full_output=1)
    return _finish(res, abs_tol)
