"""Quadrature backend for the regularized trace functionals.

Two independent routes are provided:

* a Fourier-reduced route, where the damped momentum integrals are collapsed
  onto one variable (s = p + k or u = p - k) and weighted by the kernels
  :func:`k_sum` / :func:`k_diff`;
* a position-space route integrating the double integrals with the
  ``1/((y - x) -/+ i eps)`` kernels directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _quadrature as quad
from .errors import AccuracyError, InvalidParameterError, RegulatorTooSmallError
from .profiles import (
    ProfilePair,
    eval_profile,
    fourier_profile_with_error,
    unitary_minus_one,
)

PRIMITIVES = ("F1a", "F1b", "F2a", "F2b")
DEGENERATE_RTOL = 1e-12
ACCURACY_RTOL = 1e-6
DIRECT_MIN_EPS = 1e-4


@dataclass(frozen=True)
class EvalResult:
    """One functional value with its error estimate and provenance.

    ``parts`` holds named sub-contributions when a backend reports them (the
    two O(1/eps) pieces of the a-type functionals).
    """

    value: complex
    error_estimate: float
    backend: str
    warnings: tuple[str, ...] = ()
    parts: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "error_estimate", float(self.error_estimate))
        if not np.isfinite(self.value):
            raise ValueError("EvalResult value must be finite")
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be >= 0")


def _check_eps(*eps):
    for e in eps:
        if not (np.isfinite(e) and e > 0):
            raise InvalidParameterError(f"regulators must be > 0, got {e}")


def delta_eps(w, eps):
    """Lorentzian nascent delta, (1/pi) eps / (w^2 + eps^2)."""
    _check_eps(eps)
    w = np.asarray(w, dtype=float)
    return eps / (np.pi * (w * w + eps * eps))


def k_sum(s, eps1, eps2):
    """Weight of the damped (p, k) quarter plane on the line p + k = s >= 0.

    (exp(-s eps2) - exp(-s eps1)) / (eps1 - eps2), replaced by the analytic
    limit s exp(-s eps) when the regulators agree to 1e-12 relative.
    Symmetric in (eps1, eps2) bit for bit.
    """
    _check_eps(eps1, eps2)
    lo, hi = min(eps1, eps2), max(eps1, eps2)
    s = np.asarray(s, dtype=float)
    if hi - lo < DEGENERATE_RTOL * (lo + hi):
        eps = 0.5 * (lo + hi)
        return s * np.exp(-s * eps)
    d = hi - lo
    return np.exp(-s * lo) * (-np.expm1(-s * d)) / d


def k_diff(u, eps1, eps2):
    """Weight of the damped quarter plane on the line p - k = u.

    exp(-u eps1)/(eps1 + eps2) for u >= 0 and exp(u eps2)/(eps1 + eps2) below.
    """
    _check_eps(eps1, eps2)
    u = np.asarray(u, dtype=float)
    total = eps1 + eps2
    return np.where(u >= 0, np.exp(-np.abs(u) * eps1), np.exp(-np.abs(u) * eps2)) / total


def regulator_warnings(pair: ProfilePair, eps1, eps2):
    limit = pair.min_width / 10.0
    return tuple(
        f"{name}={e:g} exceeds width/10={limit:g}"
        for name, e in (("eps1", eps1), ("eps2", eps2))
        if e > limit
    )


# ---------------------------------------------------------------------------
# Fourier-reduced route


@dataclass(frozen=True)
class _SpectralTable:
    """g(+-t) and w(+-t) on a composite rule over t in [0, t_max]."""

    t_max: float
    nodes: tuple  # (t_high, wt_high, t_low, wt_low)
    gp: tuple  # g(+t) high/low
    gm: tuple  # g(-t)
    wp: tuple  # w(+t)
    wm: tuple  # w(-t)
    g0: complex  # g(0) = integral of A V^dagger
    factor_error: float  # bound on |error of g*w| pointwise


def _truncation_point(pair: ProfilePair) -> float:
    # scan blocks of t until |g w| stays at round-off level for a whole block
    step, block = 1.0, 32.0
    last, lo = 0.0, 0.0
    scale = 1.0
    while lo < 1024.0:
        t = np.arange(lo, lo + block, step)
        gw = np.zeros(t.size)
        for sgn in (1.0, -1.0):
            g = fourier_profile_with_error(pair, "AVdag_minus", sgn * t)[0]
            w = fourier_profile_with_error(pair, "W_plus", sgn * t)[0]
            gw = np.maximum(gw, np.abs(g * w))
        scale = max(scale, float(gw.max()))
        above = np.nonzero(gw > 1e-17 * scale)[0]
        if above.size == 0:
            break
        last = float(t[above[-1]])
        lo += block
    return last + 2.0 * step


@lru_cache(maxsize=64)
def _spectral_table(pair: ProfilePair) -> _SpectralTable:
    t_max = _truncation_point(pair)
    h = min(0.5, np.pi / max(pair.support_radius, 1.0) / 2.0)
    (th, wh), (tl, wl) = quad.paired_rules(quad.uniform_breaks(0.0, t_max, h))

    def both(which, t):
        v, e = fourier_profile_with_error(pair, which, t)
        return v, e

    gp_h, egp = both("AVdag_minus", th)
    gm_h, egm = both("AVdag_minus", -th)
    wp_h, ewp = both("W_plus", th)
    wm_h, ewm = both("W_plus", -th)
    gp_l, _ = both("AVdag_minus", tl)
    gm_l, _ = both("AVdag_minus", -tl)
    wp_l, _ = both("W_plus", tl)
    wm_l, _ = both("W_plus", -tl)
    g0 = complex(fourier_profile_with_error(pair, "AVdag_minus", 0.0)[0])
    ferr = float(
        max(
            np.max(np.abs(gp_h) * ewp + np.abs(wp_h) * egp, initial=0.0),
            np.max(np.abs(gm_h) * ewm + np.abs(wm_h) * egm, initial=0.0),
        )
    )
    return _SpectralTable(
        t_max, (th, wh, tl, wl), (gp_h, gp_l), (gm_h, gm_l), (wp_h, wp_l), (wm_h, wm_l), g0, ferr
    )


def _weighted(table, kernel, side):
    th, wh, tl, wl = table.nodes
    g, w = (table.gp, table.wp) if side > 0 else (table.gm, table.wm)
    hi = np.dot(wh * kernel(th), g[0] * w[0])
    lo = np.dot(wl * kernel(tl), g[1] * w[1])
    kabs = np.dot(wh, np.abs(kernel(th)))
    return hi, abs(hi - lo) + kabs * table.factor_error


def eval_functional_fourier(pair: ProfilePair, kind: str, eps1: float, eps2: float) -> EvalResult:
    """Evaluate one primitive functional through the one-dimensional reduction.

    b-type::

        F1b = 1/(4 pi^2) int_0^inf K_sum(s) g(s) w(s) ds
        F2b = 1/(4 pi^2) int_0^inf K_sum(s) g(-s) w(-s) ds

    a-type::

        F1a = g(0) / (2 pi (eps1 + eps2))
              + 1/(4 pi^2) int K_diff(u; eps1, eps2) g(-u) w(-u) du

    and F2a with the regulators exchanged inside ``K_diff``.  For a-type
    results ``parts`` carries ``delta_term`` and ``kernel_term``; both grow
    like 1/eps and cancel against each other because the field integrates
    to zero.
    """
    if kind not in PRIMITIVES:
        raise InvalidParameterError(f"kind must be one of {PRIMITIVES}, got {kind!r}")
    _check_eps(eps1, eps2)
    warnings = regulator_warnings(pair, eps1, eps2)
    if pair.is_trivial_field or pair.is_trivial_phase or pair.support_radius == 0:
        parts = {"delta_term": 0j, "kernel_term": 0j} if kind in ("F1a", "F2a") else {}
        return EvalResult(0j, 0.0, "fourier", warnings, parts)

    table = _spectral_table(pair)
    pref = 1.0 / (4.0 * np.pi**2)
    parts = {}
    if kind in ("F1b", "F2b"):
        side = 1 if kind == "F1b" else -1
        val, err = _weighted(table, lambda t: k_sum(t, eps1, eps2), side)
        value, error = pref * val, pref * err
    else:
        # t = -u: t > 0 draws on the u < 0 branch of K_diff and vice versa
        a, b = (eps2, eps1) if kind == "F1a" else (eps1, eps2)
        total = eps1 + eps2
        v_pos, e_pos = _weighted(table, lambda t: np.exp(-t * a) / total, 1)
        v_neg, e_neg = _weighted(table, lambda t: np.exp(-t * b) / total, -1)
        kernel_term = pref * (v_pos + v_neg)
        delta_term = table.g0 / (2.0 * np.pi * total)
        value = delta_term + kernel_term
        error = pref * (e_pos + e_neg) + 1e-15 * abs(delta_term)
        parts = {"delta_term": complex(delta_term), "kernel_term": complex(kernel_term)}

    if error > ACCURACY_RTOL * max(1.0, abs(value)):
        raise AccuracyError(f"fourier {kind}: error estimate {error:.2e} exceeds tolerance")
    return EvalResult(value, error, "fourier", warnings, parts)


# ---------------------------------------------------------------------------
# Position-space route

# (sign, pole offsets a, b) for  sign / ((w + i a)(w + i b)),  w = y - x
_DIRECT_KERNELS = {
    "F1a": (1.0, "-e1", "+e2"),
    "F1b": (-1.0, "+e1", "+e2"),
    "F2a": (1.0, "-e2", "+e1"),
    "F2b": (-1.0, "-e2", "-e1"),
}


def _offsets(kind, eps1, eps2):
    sign, p, q = _DIRECT_KERNELS[kind]
    val = {"e1": eps1, "e2": eps2}

    def off(tok):
        return (1.0 if tok[0] == "+" else -1.0) * val[tok[1:]]

    return sign, off(p), off(q)


def _kernel_line_integral(a, b):
    """Integral over the real line of 1/((w + ia)(w + ib)) for real a, b != 0.

    Zero when both poles sit on the same side of the axis, otherwise
    2 pi / |a - b|.
    """
    if np.sign(a) == np.sign(b):
        return 0.0
    return 2.0 * np.pi / abs(a - b)


def eval_functional_direct2d(pair: ProfilePair, kind: str, eps1: float, eps2: float) -> EvalResult:
    """Evaluate a primitive functional from its position-space double integral.

    e.g. F1a = 1/(4 pi^2) int dx A V^dagger(x) int dy V(y) / (((y-x) - i eps1)((y-x) + i eps2)).

    V(y) is split as 1 + W(y); the constant part integrates against the
    kernel in closed form (residues), and the W part is integrated on panels
    graded geometrically toward y = x at the regulator scale.
    """
    if kind not in PRIMITIVES:
        raise InvalidParameterError(f"kind must be one of {PRIMITIVES}, got {kind!r}")
    _check_eps(eps1, eps2)
    if min(eps1, eps2) < DIRECT_MIN_EPS:
        raise RegulatorTooSmallError(
            f"direct2d needs regulators >= {DIRECT_MIN_EPS:g}; use the fourier backend"
        )
    warnings = regulator_warnings(pair, eps1, eps2)
    if pair.is_trivial_field or pair.support_radius == 0:
        return EvalResult(0j, 0.0, "direct2d", warnings)

    sign, a, b = _offsets(kind, eps1, eps2)
    r = pair.support_radius
    h = pair.min_width / 4.0
    (xh, wxh), (xl, wxl) = quad.paired_rules(quad.uniform_breaks(-r, r, h))
    w_breaks = quad.graded_breaks(-2.0 * r, 2.0 * r, 0.0, min(eps1, eps2), h)
    (uh, wuh), (ul, wul) = quad.paired_rules(w_breaks)

    def kernel(w):
        return sign / ((w + 1j * a) * (w + 1j * b))

    def inner(x, u, wu):
        # rows: x, columns: w; chunked to bound memory
        out = np.empty(x.size, dtype=complex)
        kw = wu * kernel(u)
        for start in range(0, x.size, 128):
            xs = x[start:start + 128, None]
            out[start:start + 128] = unitary_minus_one(pair, xs + u[None, :]) @ kw
        return out

    const = sign * _kernel_line_integral(a, b)

    def outer(x, wx, u, wu):
        s = eval_profile(pair, x)
        return np.dot(wx * s.AVdag, const + inner(x, u, wu))

    pref = 1.0 / (4.0 * np.pi**2)
    hi = outer(xh, wxh, uh, wuh)
    lo_outer = outer(xl, wxl, uh, wuh)
    lo_inner = outer(xh, wxh, ul, wul)
    value = pref * hi
    error = pref * (abs(hi - lo_outer) + abs(hi - lo_inner))
    if error > ACCURACY_RTOL * max(1.0, abs(value)):
        raise AccuracyError(f"direct2d {kind}: error estimate {error:.2e} exceeds tolerance")
    return EvalResult(value, error, "direct2d", warnings)
