"""Admissible test-function pairs (A, C) and their smooth integrals.

A profile pair is built from two lists of Gaussian terms.  The first list
defines a decaying base function f and the external field is its derivative,
A = f', so that the integral of A over the line vanishes identically.  The
second list defines the real phase C directly; the unitary multiplier is
V = exp(iC) and W = V - 1 is its decaying part.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from . import _quadrature as quad
from .errors import InvalidParameterError

# Relative magnitude below which a term counts as vanished.
SUPPORT_CUTOFF = 1e-16


@dataclass(frozen=True)
class GaussianTerm:
    """``amplitude * exp(-(x - center)**2 / width**2)``."""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        for name in ("amplitude", "center", "width"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.width <= 0:
            raise InvalidParameterError(f"width must be > 0, got {self.width}")

    def value(self, x):
        return self.amplitude * np.exp(-(((x - self.center) / self.width) ** 2))

    def derivative(self, x):
        u = (x - self.center) / self.width
        return -2.0 * self.amplitude * u / self.width * np.exp(-(u**2))

    def to_dict(self):
        return {"amplitude": self.amplitude, "center": self.center, "width": self.width}


@dataclass(frozen=True)
class ProfilePair:
    f_terms: tuple[GaussianTerm, ...]
    c_terms: tuple[GaussianTerm, ...]
    support_radius: float

    @property
    def min_width(self) -> float:
        widths = [t.width for t in self.f_terms + self.c_terms]
        return min(widths) if widths else np.inf

    @property
    def is_trivial_field(self) -> bool:
        return not self.f_terms

    @property
    def is_trivial_phase(self) -> bool:
        return not self.c_terms

    def to_dict(self):
        return {
            "f_terms": [t.to_dict() for t in self.f_terms],
            "c_terms": [t.to_dict() for t in self.c_terms],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProfilePair":
        unknown = set(data) - {"f_terms", "c_terms"}
        if unknown:
            raise InvalidParameterError(f"unknown profile keys: {sorted(unknown)}")
        return build_profile(data.get("f_terms", []), data.get("c_terms", []))


def _as_term(term) -> GaussianTerm:
    if isinstance(term, GaussianTerm):
        return term
    if isinstance(term, Mapping):
        unknown = set(term) - {"amplitude", "center", "width"}
        if unknown:
            raise InvalidParameterError(f"unknown term keys: {sorted(unknown)}")
        try:
            return GaussianTerm(term["amplitude"], term["center"], term["width"])
        except KeyError as exc:
            raise InvalidParameterError(f"term is missing {exc}") from None
    amplitude, center, width = term
    return GaussianTerm(amplitude, center, width)


def _radius(terms: Sequence[GaussianTerm]) -> float:
    if not terms:
        return 0.0
    amax = max(abs(t.amplitude) for t in terms)
    if amax == 0:
        return 0.0
    r = 0.0
    for t in terms:
        if t.amplitude == 0:
            continue
        decades = np.log(abs(t.amplitude) / amax) - np.log(SUPPORT_CUTOFF)
        if decades <= 0:
            continue  # term is below the cutoff everywhere
        r = max(r, abs(t.center) + t.width * np.sqrt(decades))
    return float(r)


def build_profile(f_terms: Iterable = (), c_terms: Iterable = ()) -> ProfilePair:
    """Build a profile pair from Gaussian terms (objects, dicts or triples)."""
    f = tuple(_as_term(t) for t in f_terms)
    c = tuple(_as_term(t) for t in c_terms)
    return ProfilePair(f, c, max(_radius(f), _radius(c)))


def reference_pair() -> ProfilePair:
    """A(x) = -2x exp(-x^2), C(x) = exp(-x^2)."""
    return build_profile([(1.0, 0.0, 1.0)], [(1.0, 0.0, 1.0)])


class ProfileSample(NamedTuple):
    A: np.ndarray
    C: np.ndarray
    Cprime: np.ndarray
    V: np.ndarray
    W: np.ndarray
    AVdag: np.ndarray


def _sum(terms, method, x):
    out = np.zeros_like(x, dtype=float)
    for t in terms:
        out = out + getattr(t, method)(x)
    return out


def field(pair: ProfilePair, x):
    """A(x) = f'(x)."""
    return _sum(pair.f_terms, "derivative", np.asarray(x, dtype=float))


def phase(pair: ProfilePair, x):
    """C(x)."""
    return _sum(pair.c_terms, "value", np.asarray(x, dtype=float))


def phase_derivative(pair: ProfilePair, x):
    return _sum(pair.c_terms, "derivative", np.asarray(x, dtype=float))


def unitary(pair: ProfilePair, x):
    """V(x) = exp(iC(x))."""
    return np.exp(1j * phase(pair, x))


def unitary_minus_one(pair: ProfilePair, x):
    """W = V - 1, formed without cancellation for small C."""
    c = phase(pair, x)
    return -2.0 * np.sin(0.5 * c) ** 2 + 1j * np.sin(c)


def eval_profile(pair: ProfilePair, x) -> ProfileSample:
    """All pointwise quantities at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    a = field(pair, x)
    c = phase(pair, x)
    v = np.exp(1j * c)
    w = -2.0 * np.sin(0.5 * c) ** 2 + 1j * np.sin(c)
    return ProfileSample(a, c, phase_derivative(pair, x), v, w, a * np.conj(v))


def _breaks(pair: ProfilePair, h=None):
    r = pair.support_radius
    if h is None:
        h = min(pair.min_width / 4.0, 1.0)
    return quad.uniform_breaks(-r, r, h)


def _centers(pair):
    return sorted({t.center for t in pair.f_terms + pair.c_terms})


@lru_cache(maxsize=256)
def schwinger_integral(pair: ProfilePair) -> float:
    """I = integral of A(x) C'(x) over the line (absolute error <= 1e-10)."""
    if pair.is_trivial_field or pair.is_trivial_phase:
        return 0.0
    r = pair.support_radius
    val, err = integrate.quad(
        lambda x: field(pair, x) * phase_derivative(pair, x),
        -r, r,
        points=[c for c in _centers(pair) if -r < c < r] or None,
        epsabs=1e-13, epsrel=1e-13, limit=400,
    )
    if err > 1e-10:
        raise RuntimeError(f"schwinger_integral error estimate {err:.2e} too large")
    return float(val)


def field_integral(pair: ProfilePair) -> float:
    """Quadrature of A over the support interval (structurally zero)."""
    if pair.is_trivial_field:
        return 0.0
    val, _ = quad.integrate(lambda x: field(pair, x), _breaks(pair))
    return float(val)


def schwinger_combination(pair: ProfilePair) -> complex:
    """i * integral of A V^dagger dV/dx, by direct complex quadrature.

    Equals -I analytically because V^dagger V' = iC'; this routine does not
    use that identity, so it can be compared against :func:`schwinger_integral`.
    """
    if pair.is_trivial_field or pair.is_trivial_phase:
        return 0j

    def integrand(x):
        s = eval_profile(pair, x)
        dv = 1j * s.Cprime * s.V
        return s.A * np.conj(s.V) * dv

    val, _ = quad.integrate(integrand, _breaks(pair))
    return complex(1j * val)


_WHICH = ("AVdag_minus", "W_plus")


def _integrand_values(pair, which, x):
    if which == "AVdag_minus":
        s = eval_profile(pair, x)
        return s.AVdag
    return unitary_minus_one(pair, x)


def fourier_profile_with_error(pair: ProfilePair, which: str, s, tol=1e-9):
    """Fourier factor and its error estimate; see :func:`fourier_profile`."""
    if which not in _WHICH:
        raise InvalidParameterError(f"which must be one of {_WHICH}, got {which!r}")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(s_arr)):
        raise InvalidParameterError("s must be finite")
    out = np.zeros(s_arr.shape, dtype=complex)
    err = np.zeros(s_arr.shape)
    trivial = pair.is_trivial_phase if which == "W_plus" else pair.is_trivial_field
    if trivial or pair.support_radius == 0:
        return (out[0], 0.0) if np.ndim(s) == 0 else (out, err)

    sign = -1.0 if which == "AVdag_minus" else 1.0
    smax = float(np.max(np.abs(s_arr))) if s_arr.size else 0.0
    h = pair.min_width / 4.0
    if smax > 0:
        h = min(h, np.pi / smax)
    for _ in range(6):
        (xh, wh), (xl, wl) = quad.paired_rules(_breaks(pair, h))
        fh = wh * _integrand_values(pair, which, xh)
        fl = wl * _integrand_values(pair, which, xl)
        # chunk over s to bound the size of the phase matrix
        for start in range(0, s_arr.size, 256):
            sl = slice(start, start + 256)
            ss = s_arr[sl, None]
            hi = np.exp(sign * 1j * ss * xh[None, :]) @ fh
            lo = np.exp(sign * 1j * ss * xl[None, :]) @ fl
            out[sl] = hi
            err[sl] = np.abs(hi - lo)
        if np.all(err <= tol):
            break
        h /= 2.0
    if np.ndim(s) == 0:
        return complex(out[0]), float(err[0])
    return out, err


def fourier_profile(pair: ProfilePair, which: str, s):
    """Fourier factors of the profile.

    ``which="AVdag_minus"`` gives  g(s) = integral exp(-isx) A(x) V^dagger(x) dx,
    ``which="W_plus"`` gives       w(s) = integral W(y) exp(+isy) dy.

    The bracket <V exp(isy)> equals 2 pi delta(s) + w(s); the delta part is
    left to callers.  Panels are no wider than min(width/4, pi/|s|) and are
    halved until the order-16 and order-8 rules agree to 1e-9.
    """
    return fourier_profile_with_error(pair, which, s)[0]
