"""Discrete spectral backend on a periodic box.

Plane waves on a box of length L with M retained momenta
k_n = 2 pi n / L, n in [-M/2, M/2).  Multiplication operators are diagonal in
position space, projectors and damping are diagonal in momentum space, and
the regularized functionals become finite double sums over retained modes.

Matrix elements <phi_p, X phi_q> of a multiplication operator are the box
Fourier coefficients of X at k_p - k_q.  Sampling X on the M-point grid aliases
differences |p - q| >= M/2 onto low coefficients, so traces are evaluated
from samples on an ``oversample``-times finer grid, where every difference
between retained modes is resolved.  ``oversample=1`` gives the plain
circulant (collocation) lattice.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .continuum import PRIMITIVES, EvalResult
from .errors import InvalidParameterError
from .profiles import ProfilePair, eval_profile

# eps * k_max below this leaves truncated modes effectively undamped
WINDOW_DAMPING = 5.0
DENSE_MAX_M = 256


@dataclass(frozen=True)
class LatticeConfig:
    box_length: float
    grid_size: int
    oversample: int = 2

    def __post_init__(self):
        L, M = self.box_length, self.grid_size
        if not (np.isfinite(L) and L > 0):
            raise InvalidParameterError(f"box length must be > 0, got {L}")
        if int(M) != M or M < 8 or (int(M) & (int(M) - 1)):
            raise InvalidParameterError(f"grid size must be a power of two >= 8, got {M}")
        if int(self.oversample) != self.oversample or self.oversample < 1:
            raise InvalidParameterError(f"oversample must be a positive integer, got {self.oversample}")
        object.__setattr__(self, "box_length", float(L))
        object.__setattr__(self, "grid_size", int(M))
        object.__setattr__(self, "oversample", int(self.oversample))

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def k_max(self) -> float:
        return np.pi * self.grid_size / self.box_length

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        """n = -M/2 .. M/2 - 1 in increasing order."""
        return np.arange(-self.grid_size // 2, self.grid_size // 2)

    @cached_property
    def momenta(self) -> np.ndarray:
        return self.dk * self.mode_numbers

    def points(self, grid="coarse") -> int:
        return self.grid_size * (self.oversample if grid == "fine" else 1)

    def positions(self, grid="coarse") -> np.ndarray:
        n = self.points(grid)
        return -0.5 * self.box_length + self.box_length * np.arange(n) / n

    def fft_momenta(self, grid="coarse") -> np.ndarray:
        """Momentum of each FFT bin (numpy ordering)."""
        n = self.points(grid)
        return self.dk * np.fft.fftfreq(n, 1.0 / n)

    def retained(self, grid="coarse") -> np.ndarray:
        n = self.points(grid)
        idx = np.fft.fftfreq(n, 1.0 / n)
        return (idx >= -self.grid_size // 2) & (idx < self.grid_size // 2)


def build_lattice(L: float, M: int, oversample: int = 2) -> LatticeConfig:
    return LatticeConfig(L, M, oversample)


@dataclass(frozen=True)
class LatticeOperator:
    """Product of diagonal factors acting on grid vectors.

    ``factors`` are applied right to left; each is ``("position", diag)`` or
    ``("momentum", diag)`` with the momentum diagonal in FFT ordering.
    """

    factors: tuple
    size: int
    warnings: tuple[str, ...] = field(default=(), compare=False)
    fine_diag: np.ndarray | None = field(default=None, compare=False, repr=False)

    def apply(self, v):
        out = np.asarray(v, dtype=complex)
        for basis, diag in reversed(self.factors):
            if basis == "position":
                out = diag[:, None] * out if out.ndim == 2 else diag * out
            else:
                d = diag[:, None] if out.ndim == 2 else diag
                out = np.fft.ifft(d * np.fft.fft(out, axis=0), axis=0)
        return out

    def __matmul__(self, other: "LatticeOperator") -> "LatticeOperator":
        if self.size != other.size:
            raise InvalidParameterError("operators live on different grids")
        return LatticeOperator(self.factors + other.factors, self.size, self.warnings + other.warnings)

    def adjoint(self) -> "LatticeOperator":
        return LatticeOperator(tuple((b, np.conj(d)) for b, d in reversed(self.factors)), self.size, self.warnings)

    def dense(self) -> np.ndarray:
        return self.apply(np.eye(self.size, dtype=complex))


def identity(cfg: LatticeConfig, grid="coarse") -> LatticeOperator:
    n = cfg.points(grid)
    return LatticeOperator((("position", np.ones(n, dtype=complex)),), n, fine_diag=np.ones(cfg.points("fine"), complex))


def _check_eps(eps):
    if eps is None or not (np.isfinite(eps) and eps > 0):
        raise InvalidParameterError(f"damping regulator must be > 0, got {eps}")


def mask_values(cfg: LatticeConfig, kind: str, eps: float | None = None, grid="coarse") -> np.ndarray:
    """Momentum-diagonal entries (FFT ordering) of a projector or damping.

    On the fine grid every mask also removes the non-retained modes.
    """
    k = cfg.fft_momenta(grid)
    keep = cfg.retained(grid).astype(float)
    if kind == "P_minus":
        vals = (k < 0).astype(float)
    elif kind == "P_plus":
        vals = (k >= 0).astype(float)
    elif kind == "damping":
        _check_eps(eps)
        vals = np.exp(-np.abs(k) * eps)
    else:
        raise InvalidParameterError(f"unknown mask kind {kind!r}")
    return vals * keep


def momentum_mask(cfg: LatticeConfig, kind: str, eps: float | None = None, grid="coarse") -> LatticeOperator:
    """Projector onto k < 0 (``P_minus``), k >= 0 (``P_plus``), or exp(-|k| eps)."""
    vals = mask_values(cfg, kind, eps, grid).astype(complex)
    return LatticeOperator((("momentum", vals),), vals.size)


def profile_warnings(cfg: LatticeConfig, pair: ProfilePair) -> tuple[str, ...]:
    out = []
    r = pair.support_radius
    if r >= cfg.box_length / 2:
        out.append(f"support radius {r:.3g} does not fit in box L={cfg.box_length:g}")
    elif cfg.box_length < 8.0 * r:
        out.append(f"box L={cfg.box_length:g} is shorter than 4x support diameter {2 * r:.3g}")
    return tuple(out)


def _mult_values(pair, which, x):
    s = eval_profile(pair, x)
    if which == "A":
        return s.A.astype(complex)
    if which == "V":
        return s.V
    if which == "Vdag":
        return np.conj(s.V)
    if which == "AVdag":
        return s.AVdag
    raise InvalidParameterError(f"unknown multiplication operator {which!r}")


def mult_operator(cfg: LatticeConfig, pair: ProfilePair, which: str, grid="coarse") -> LatticeOperator:
    """Position-diagonal operator for A, V, V^dagger or A V^dagger."""
    diag = _mult_values(pair, which, cfg.positions(grid))
    fine = _mult_values(pair, which, cfg.positions("fine"))
    return LatticeOperator((("position", diag),), diag.size, profile_warnings(cfg, pair), fine)


def _coefficients(cfg: LatticeConfig, values: np.ndarray) -> np.ndarray:
    """Box Fourier coefficients c[d] = <phi_{p}, X phi_{p-d}> for d in (-M, M).

    ``values`` are samples on the fine grid; index ``d + M - 1`` holds c[d].
    """
    n = values.size
    M = cfg.grid_size
    xh = np.fft.fft(values) / n
    d = np.arange(-(M - 1), M)
    # grid starts at -L/2, which multiplies coefficient d by (-1)^d
    return xh[d % n] * np.where(d % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class BlockElements:
    sigma: str
    tau: str
    row_momenta: np.ndarray
    col_momenta: np.ndarray
    entries: np.ndarray


def _galerkin_matrix(cfg: LatticeConfig, X: LatticeOperator) -> np.ndarray:
    """<phi_p, X phi_q> over the retained modes (rows/cols in increasing k)."""
    M = cfg.grid_size
    if X.fine_diag is not None and cfg.oversample > 1:
        c = _coefficients(cfg, X.fine_diag)
        n = cfg.mode_numbers
        return c[(n[:, None] - n[None, :]) + M - 1]
    # generic operator: act on coarse plane waves
    if X.size != M:
        raise InvalidParameterError("operator must act on the coarse grid")
    x = cfg.positions()
    waves = np.exp(1j * np.outer(x, cfg.momenta)) / np.sqrt(M)
    return waves.conj().T @ X.apply(waves)


def block_elements(cfg: LatticeConfig, X: LatticeOperator, sigma: str, tau: str) -> BlockElements:
    """Matrix elements <phi^sigma_p, X phi^tau_q>; ``+`` modes have k >= 0."""
    for s in (sigma, tau):
        if s not in ("+", "-"):
            raise InvalidParameterError(f"block index must be '+' or '-', got {s!r}")
    mat = _galerkin_matrix(cfg, X)
    k = cfg.momenta
    rows = k >= 0 if sigma == "+" else k < 0
    cols = k >= 0 if tau == "+" else k < 0
    return BlockElements(sigma, tau, k[rows], k[cols], mat[np.ix_(rows, cols)])


# ---------------------------------------------------------------------------
# Damped traces

# (left projector, left regulator, right projector, right regulator)
TRACE_FORMS = {
    "F1a": ("P_minus", "eps1", "P_minus", "eps2"),
    "F1b": ("P_plus", "eps1", "P_minus", "eps2"),
    "F2a": ("P_minus", "eps2", "P_minus", "eps1"),
    "F2b": ("P_minus", "eps2", "P_plus", "eps1"),
}


def _mode_weights(cfg, proj, eps):
    k = cfg.momenta
    sel = (k < 0) if proj == "P_minus" else (k >= 0)
    return sel * np.exp(-np.abs(k) * eps)


def window_warnings(cfg: LatticeConfig, pair: ProfilePair, eps1, eps2) -> tuple[str, ...]:
    out = []
    for name, e in (("eps1", eps1), ("eps2", eps2)):
        if e * cfg.k_max < WINDOW_DAMPING:
            out.append(f"{name}={e:g}: eps*k_max={e * cfg.k_max:.3g} < {WINDOW_DAMPING:g}")
        if e > pair.min_width / 10.0:
            out.append(f"{name}={e:g} exceeds width/10={pair.min_width / 10:g}")
    return tuple(out)


def _correlate(w1, w2):
    """R[d] = sum_p w1[p] w2[p - d] for d in (-M, M)."""
    if w1.size <= 4096:
        return np.correlate(w1, w2, mode="full")
    n = 2 * w1.size
    r = np.fft.ifft(np.fft.fft(w1, n) * np.conj(np.fft.fft(w2, n))).real
    return np.concatenate([r[-(w1.size - 1):], r[: w1.size]])


def damped_trace(
    cfg: LatticeConfig, pair: ProfilePair, kind: str, eps1: float, eps2: float, method: str = "correlation"
) -> EvalResult:
    """Tr[P_L D(e_L) (A V^dagger) P_R D(e_R) V] with the slots in ``TRACE_FORMS``.

    ``method="correlation"`` uses the Toeplitz structure: the trace reduces
    to sum_d c_X[d] c_V[-d] R[d] with R the correlation of the two mode
    weights.  ``method="dense"`` forms the Galerkin matrices explicitly
    (M <= 256) and ``method="chain"`` applies the operator chain to every
    retained plane wave on the fine grid.
    """
    if kind not in TRACE_FORMS:
        raise InvalidParameterError(f"kind must be one of {PRIMITIVES}, got {kind!r}")
    for e in (eps1, eps2):
        _check_eps(e)
    left, le, right, re = TRACE_FORMS[kind]
    e_left = eps1 if le == "eps1" else eps2
    e_right = eps1 if re == "eps1" else eps2
    warn = profile_warnings(cfg, pair) + window_warnings(cfg, pair, eps1, eps2)
    w1 = _mode_weights(cfg, left, e_left)
    w2 = _mode_weights(cfg, right, e_right)

    if method == "correlation":
        xf = mult_operator(cfg, pair, "AVdag").fine_diag
        vf = mult_operator(cfg, pair, "V").fine_diag
        if cfg.oversample == 1:
            xf = _mult_values(pair, "AVdag", cfg.positions())
            vf = _mult_values(pair, "V", cfg.positions())
        cx = _coefficients(cfg, xf)
        cv = _coefficients(cfg, vf)
        value = np.sum(cx * cv[::-1] * _correlate(w1, w2))
    elif method == "dense":
        if cfg.grid_size > DENSE_MAX_M:
            raise InvalidParameterError(f"dense mode is limited to M <= {DENSE_MAX_M}")
        X = _galerkin_matrix(cfg, mult_operator(cfg, pair, "AVdag"))
        Y = _galerkin_matrix(cfg, mult_operator(cfg, pair, "V"))
        value = np.einsum("p,pk,k,kp->", w1, X, w2, Y)
    elif method == "chain":
        chain = (
            momentum_mask(cfg, left, grid="fine")
            @ momentum_mask(cfg, "damping", e_left, grid="fine")
            @ mult_operator(cfg, pair, "AVdag", grid="fine")
            @ momentum_mask(cfg, right, grid="fine")
            @ momentum_mask(cfg, "damping", e_right, grid="fine")
            @ mult_operator(cfg, pair, "V", grid="fine")
        )
        n = cfg.points("fine")
        x = cfg.positions("fine")
        waves = np.exp(1j * np.outer(x, cfg.momenta)) / np.sqrt(n)
        value = np.sum(np.conj(waves) * chain.apply(waves))
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    # round-off of an M-term sum of O(1) products
    err = 1e-15 * cfg.grid_size * max(1.0, abs(value))
    return EvalResult(complex(value), err, "lattice", warn)


def transformed_projector(cfg: LatticeConfig, pair: ProfilePair, kind: str) -> LatticeOperator:
    """V^dagger P^0 V on the coarse grid."""
    return mult_operator(cfg, pair, "Vdag") @ momentum_mask(cfg, kind) @ mult_operator(cfg, pair, "V")


def unregularized_delta(cfg: LatticeConfig, pair: ProfilePair) -> complex:
    """Tr P-0 V A V^dagger P-0 - Tr P-0 A P-0 on the retained modes, undamped."""
    P = momentum_mask(cfg, "P_minus", grid="fine")
    A = mult_operator(cfg, pair, "A", grid="fine")
    VAVd = mult_operator(cfg, pair, "V", grid="fine") @ A @ mult_operator(cfg, pair, "Vdag", grid="fine")
    n = cfg.points("fine")
    x = cfg.positions("fine")
    waves = np.exp(1j * np.outer(x, cfg.momenta)) / np.sqrt(n)
    first = np.sum(np.conj(waves) * (P @ VAVd @ P).apply(waves))
    second = np.sum(np.conj(waves) * (P @ A @ P).apply(waves))
    return complex(first - second)
