"""Composite functionals, regulator schedules, sweeps and eps -> 0 limits."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import continuum, lattice
from .continuum import PRIMITIVES, EvalResult
from .errors import AnomalyLabError, DegenerateFitError, InvalidParameterError
from .oracles import ORACLE_KINDS, J, oracle_value  # noqa: F401  (J is part of this API)
from .profiles import ProfilePair

BACKENDS = ("lattice", "fourier", "direct2d")

# composite -> ((sign, primitive), ...)
COMPOSITES = {
    "F1": ((1, "F1a"), (1, "F1b")),
    "F2": ((1, "F2a"), (1, "F2b")),
    "Delta": ((1, "F1a"), (1, "F1b"), (-1, "F2a"), (-1, "F2b")),
    "DeltaPrime": ((1, "F1b"), (-1, "F2b")),
    "SplitDifference": ((1, "F1a"), (-1, "F2a")),
}
KINDS = PRIMITIVES + tuple(COMPOSITES)
SCHEDULE_KINDS = ("symmetric", "sqrt", "power", "ratio")

DEFAULT_LATTICE = lattice.LatticeConfig(40.0, 2048)


@dataclass(frozen=True)
class EpsilonSchedule:
    kind: str
    param: float | None
    eps1_sequence: tuple[float, ...]

    def __post_init__(self):
        seq = tuple(float(e) for e in self.eps1_sequence)
        if not seq or any(not (0 < e < 1) for e in seq):
            raise InvalidParameterError("eps1 values must lie in (0, 1)")
        if any(b >= a for a, b in zip(seq, seq[1:])):
            raise InvalidParameterError("eps1 sequence must be strictly decreasing")
        _check_schedule_kind(self.kind, self.param)
        object.__setattr__(self, "eps1_sequence", seq)

    def eps2(self, eps1: float) -> float:
        if self.kind == "symmetric":
            return eps1
        if self.kind == "sqrt":
            return float(np.sqrt(eps1))
        if self.kind == "power":
            return float(eps1**self.param)
        return float(self.param * eps1)

    def pairs(self) -> list[tuple[float, float]]:
        return [(e, self.eps2(e)) for e in self.eps1_sequence]

    def label(self) -> str:
        return self.kind if self.param is None else f"{self.kind}({self.param:g})"


def _check_schedule_kind(kind, param):
    if kind not in SCHEDULE_KINDS:
        raise InvalidParameterError(f"schedule kind must be one of {SCHEDULE_KINDS}, got {kind!r}")
    if kind == "power" and (param is None or not 0 < param < 1):
        raise InvalidParameterError(f"power schedule needs 0 < alpha < 1, got {param}")
    if kind == "ratio" and (param is None or not param > 0):
        raise InvalidParameterError(f"ratio schedule needs c > 0, got {param}")
    if kind in ("symmetric", "sqrt") and param is not None:
        raise InvalidParameterError(f"{kind} schedule takes no parameter")


def make_schedule(kind: str, param: float | None, start: float, factor: float, count: int) -> EpsilonSchedule:
    """Geometric eps1 sequence start * factor**i, i < count, with eps2 per ``kind``."""
    if not 0 < start < 1:
        raise InvalidParameterError(f"start must lie in (0, 1), got {start}")
    if not 0 < factor < 1:
        raise InvalidParameterError(f"factor must lie in (0, 1), got {factor}")
    if int(count) != count or count < 3:
        raise InvalidParameterError(f"count must be an integer >= 3, got {count}")
    _check_schedule_kind(kind, param)
    seq = tuple(start * factor**i for i in range(int(count)))
    return EpsilonSchedule(kind, None if param is None else float(param), seq)


def _primitive(pair, kind, eps1, eps2, backend, cfg):
    if backend == "fourier":
        return continuum.eval_functional_fourier(pair, kind, eps1, eps2)
    if backend == "direct2d":
        return continuum.eval_functional_direct2d(pair, kind, eps1, eps2)
    if backend == "lattice":
        return lattice.damped_trace(cfg or DEFAULT_LATTICE, pair, kind, eps1, eps2)
    raise InvalidParameterError(f"backend must be one of {BACKENDS}, got {backend!r}")


def _needed(kinds):
    out = []
    for k in kinds:
        parts = [k] if k in PRIMITIVES else [p for _, p in COMPOSITES[k]]
        out.extend(p for p in parts if p not in out)
    return out


def _assemble(kind, prims: dict, backend: str) -> EvalResult:
    if kind in PRIMITIVES:
        return prims[kind]
    value = 0j
    err = 0.0
    warn = []
    for sign, p in COMPOSITES[kind]:
        r = prims[p]
        value = value + sign * r.value
        err += r.error_estimate
        warn.extend(w for w in r.warnings if w not in warn)
    return EvalResult(value, err, backend, tuple(warn))


def evaluate_many(pair, kinds, eps1, eps2, backend="fourier", lattice_config=None) -> dict:
    """Evaluate several kinds sharing one set of primitive evaluations."""
    for k in kinds:
        if k not in KINDS:
            raise InvalidParameterError(f"kind must be one of {KINDS}, got {k!r}")
    prims = {p: _primitive(pair, p, eps1, eps2, backend, lattice_config) for p in _needed(kinds)}
    return {k: _assemble(k, prims, backend) for k in kinds}


def evaluate(pair: ProfilePair, kind: str, eps1: float, eps2: float, backend: str = "fourier",
             lattice_config: lattice.LatticeConfig | None = None) -> EvalResult:
    """One functional at (eps1, eps2); composites are sums of primitives at the same point."""
    return evaluate_many(pair, [kind], eps1, eps2, backend, lattice_config)[kind]


@dataclass(frozen=True)
class Extrapolation:
    limit: complex
    exponent: float
    residual: float


def _fit(x, v, beta):
    X = np.column_stack([np.ones_like(x), x**beta]).astype(complex)
    coef, *_ = np.linalg.lstsq(X, v, rcond=None)
    r = v - X @ coef
    return coef, float(np.sqrt(np.mean(np.abs(r) ** 2)))


def extrapolate(values, beta_range=(0.25, 2.0), max_points=5) -> Extrapolation:
    """Fit v(eps) = v_inf + b * eps**beta to the smallest-eps points.

    ``values`` is a sequence of (eps1, complex value) pairs in strictly
    decreasing eps1.  The last ``min(5, n)`` points are used; beta is
    searched on [0.25, 2].  The RMS residual of the fit is returned and a
    :class:`DegenerateFitError` is raised when it exceeds 10% of the spread
    of the fitted values (and round-off).
    """
    pts = list(values)
    if len(pts) < 3:
        raise InvalidParameterError("extrapolation needs at least 3 points")
    eps = np.array([float(e) for e, _ in pts])
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise InvalidParameterError("eps values must be positive and strictly decreasing")
    eps = eps[-max_points:]
    v = np.array([complex(val) for _, val in pts], dtype=complex)[-max_points:]
    x = eps / eps[0]
    span = float(np.max(np.abs(v[:, None] - v[None, :])))
    if span == 0:
        # constant data: any exponent fits exactly
        return Extrapolation(complex(v[-1]), 1.0, 0.0)

    lo, hi = beta_range
    grid = np.linspace(lo, hi, 176)
    rss = np.array([_fit(x, v, b)[1] for b in grid])
    i = int(np.argmin(rss))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if a < b:
        opt = minimize_scalar(lambda t: _fit(x, v, t)[1], bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12})
        beta = float(opt.x) if opt.fun <= rss[i] else float(grid[i])
    else:
        beta = float(grid[i])
    coef, resid = _fit(x, v, beta)
    if resid > max(0.1 * span, 1e-12 * float(np.max(np.abs(v)))):
        raise DegenerateFitError(f"fit residual {resid:.3e} exceeds 10% of value span {span:.3e}")
    return Extrapolation(complex(coef[0]), beta, resid)


@dataclass
class SweepRow:
    eps1: float
    eps2: float
    functional: str
    result: EvalResult
    oracle: complex | None
    abs_dev: float | None

    @property
    def backend(self):
        return self.result.backend


@dataclass
class ConvergenceReport:
    schedule: EpsilonSchedule
    backend: str
    kinds: tuple[str, ...]
    rows: list[SweepRow] = field(default_factory=list)
    extrapolated: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def values(self, kind):
        return [(r.eps1, r.result.value) for r in self.rows if r.functional == kind]


def worker_count() -> int:
    try:
        n = int(os.environ.get("ANOMALYLAB_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def _oracle_or_none(pair, kind, eps1, eps2):
    if kind not in ORACLE_KINDS:
        return None
    return oracle_value(pair, kind, eps1, eps2)


def sweep(pair: ProfilePair, schedule: EpsilonSchedule, kinds, backend: str = "fourier",
          lattice_config: lattice.LatticeConfig | None = None, threads: int | None = None) -> ConvergenceReport:
    """Evaluate ``kinds`` at every schedule point and extrapolate each to eps -> 0.

    Points are evaluated concurrently; a point whose backend raises is
    recorded in ``failures`` and left out of the table.
    """
    kinds = tuple(kinds)
    if not kinds:
        raise InvalidParameterError("kinds must be non-empty")
    for k in kinds:
        if k not in KINDS:
            raise InvalidParameterError(f"kind must be one of {KINDS}, got {k!r}")
    report = ConvergenceReport(schedule, backend, kinds)
    points = schedule.pairs()

    def run(point):
        e1, e2 = point
        try:
            return point, evaluate_many(pair, kinds, e1, e2, backend, lattice_config), None
        except AnomalyLabError as exc:
            return point, None, f"eps1={e1!r}, eps2={e2!r}: {exc}"

    # first point runs alone so that per-pair caches are filled once
    results = [run(points[0])]
    with ThreadPoolExecutor(max_workers=threads or worker_count()) as pool:
        results.extend(pool.map(run, points[1:]))

    for (e1, e2), res, failure in results:
        if failure:
            report.failures.append(failure)
            report.warnings.append(failure)
            continue
        for k in kinds:
            oracle = _oracle_or_none(pair, k, e1, e2)
            dev = None if oracle is None else abs(res[k].value - oracle)
            report.rows.append(SweepRow(e1, e2, k, res[k], oracle, dev))

    report.rows.sort(key=lambda r: (kinds.index(r.functional), -r.eps1))
    for k in kinds:
        vals = report.values(k)
        if len(vals) < 3:
            report.warnings.append(f"{k}: too few points to extrapolate")
            continue
        try:
            report.extrapolated[k] = extrapolate(vals)
        except DegenerateFitError as exc:
            report.warnings.append(f"{k}: {exc}")
    return report
