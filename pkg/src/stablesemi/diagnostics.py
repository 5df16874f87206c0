"""Stability diagnostics: correlation traces, Cesaro/Wiener functionals,
density-one estimation, atom detection, the reversible/stable split, and the
membership predicates used by the category-escape demonstration.

All asymptotic notions become finite-horizon estimates; every verdict is
labeled "evidence", never a proof.  On finite grids all spectral measures
are atomic, so almost weak stability is certified by the combination of a
simple spectrum (no repeated frequency) and a small Wiener limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import DenseSequence, HVector, inner_product_aligned
from .semigroups import ConjugatedGroup, MultiplicationGroup, SemigroupModel


@dataclass(frozen=True)
class CorrelationTrace:
    """Sampled values of t -> <T(t)x, y> on an increasing time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        vs = np.asarray(self.values, dtype=complex)
        if ts.ndim != 1 or ts.size < 1 or ts.shape != vs.shape:
            raise ValueError("times and values must be equal-length 1-d arrays")
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", ts)
        object.__setattr__(self, "values", vs)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


def correlation(T: SemigroupModel, x: HVector, y: HVector, time_grid) -> CorrelationTrace:
    times = np.asarray(time_grid, dtype=float)
    values = np.array(
        [inner_product_aligned(T.apply(t, x), y) for t in times], dtype=complex
    )
    return CorrelationTrace(times, values)


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    if times.size == 1:
        return np.ones(1)
    w = np.zeros(times.size)
    d = np.diff(times)
    w[:-1] += d / 2.0
    w[1:] += d / 2.0
    return w


def cesaro_mean_abs2(trace: CorrelationTrace) -> float:
    """Trapezoidal estimate of (1/T) * integral_0^T |<T(t)x, y>|^2 dt."""
    if trace.times.size < 2:
        raise ValueError("need at least 2 samples")
    w = _trapezoid_weights(trace.times)
    span = trace.times[-1] - trace.times[0]
    return float((w * np.abs(trace.values) ** 2).sum() / span)


def wiener_limit(U: MultiplicationGroup, x: HVector) -> float:
    """Closed-form limit of the Cesaro mean for the diagonal model (y = x).

    Equal to the sum of squared atom masses of the spectral measure of x:
    frequencies are grouped by exact equality.
    """
    masses = U.grid.weights * np.abs(x.coeffs) ** 2
    total = 0.0
    for lam in np.unique(U.symbol):
        total += float(masses[U.symbol == lam].sum()) ** 2
    return total


def density_estimate(trace: CorrelationTrace, eps: float) -> float:
    """Fraction of sampled-time measure where |value| < eps.

    Uses the same trapezoid weights as cesaro_mean_abs2, so the Chebyshev
    relation density >= 1 - cesaro/eps^2 holds exactly on the grid.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    w = _trapezoid_weights(trace.times)
    return float((w * (np.abs(trace.values) < eps)).sum() / w.sum())


def detect_atoms(U: MultiplicationGroup, mass_threshold: float) -> list[tuple[float, float]]:
    """Exact-equality frequency groups above the mass threshold.

    Masses are grid weights normalized by total mass; sorted descending.
    """
    if mass_threshold < 0:
        raise ValueError("mass threshold must be >= 0")
    total = U.grid.total_mass
    atoms = []
    for lam in np.unique(U.symbol):
        mass = float(U.grid.weights[U.symbol == lam].sum()) / total
        if mass > mass_threshold:
            atoms.append((float(lam), mass))
    atoms.sort(key=lambda fm: -fm[1])
    return atoms


def jgl_split(
    U: MultiplicationGroup, mass_threshold: float
) -> tuple[np.ndarray, np.ndarray]:
    """(reversible indices, stable indices) in the diagonal model.

    Reversible = indices inside detected atom groups (generator eigenvectors
    with non-negligible mass); stable = the complement.
    """
    atom_freqs = {f for f, _ in detect_atoms(U, mass_threshold)}
    mask = np.isin(U.symbol, list(atom_freqs)) if atom_freqs else np.zeros(U.grid.size, bool)
    return np.flatnonzero(mask), np.flatnonzero(~mask)


VERDICTS = (
    "WeaklyStableEvidence",
    "AlmostWeaklyStableEvidence",
    "PointSpectrumDetected",
    "Inconclusive",
)


@dataclass(frozen=True)
class ClassifyParams:
    horizon: float = 200.0
    eps: float = 1e-2
    delta_wiener: float = 1e-2
    delta_density: float = 0.95
    mass_threshold: float = 0.1
    samples: int = 2000


@dataclass(frozen=True)
class StabilityReport:
    cesaro_abs: float
    cesaro_abs2: float
    wiener_closed_form: float | None
    density_est: float
    atoms: tuple[tuple[float, float], ...]
    verdict: str
    tail_sup: float = field(default=float("nan"))

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if not 0.0 <= self.density_est <= 1.0 + 1e-12:
            raise ValueError("density estimate must lie in [0, 1]")

    def to_record(self) -> dict:
        rec = {
            "cesaro_abs": self.cesaro_abs,
            "cesaro_abs2": self.cesaro_abs2,
            "wiener_closed_form": self.wiener_closed_form,
            "density_est": self.density_est,
            "num_atoms": len(self.atoms),
            "largest_atom_mass": self.atoms[0][1] if self.atoms else 0.0,
            "tail_sup": self.tail_sup,
            "verdict": self.verdict,
        }
        return rec


def _diagonal_form(T: SemigroupModel) -> MultiplicationGroup | None:
    if isinstance(T, MultiplicationGroup):
        return T
    if isinstance(T, ConjugatedGroup) and isinstance(T.inner, MultiplicationGroup):
        return T.inner
    return None


def _time_grid(T: SemigroupModel, horizon: float, samples: int) -> np.ndarray:
    h = T.time_step
    if h is None:
        return np.linspace(0.0, horizon, samples)
    steps = max(1, int(np.floor(horizon / h)))
    return np.arange(0, steps + 1) * h


def classify(
    T: SemigroupModel, witnesses: DenseSequence, params: ClassifyParams = ClassifyParams()
) -> StabilityReport:
    """Finite-horizon stability verdict over normalized witnesses.

    Verdict precedence: PointSpectrumDetected (atoms above threshold, or a
    revival |<T(t)x, x>| > 1 - eps at some t bounded away from 0), then
    WeaklyStableEvidence (all pair correlations below eps on the tail window
    [T/2, T]), then AlmostWeaklyStableEvidence (density-one decay with a
    small Cesaro mean but a non-vanishing tail), else Inconclusive.
    """
    times = _time_grid(T, params.horizon, params.samples)
    normed = [x.normalized() for x in witnesses]
    tail = times >= params.horizon / 2.0
    revival_window = times >= max(params.horizon / 100.0, times[1] if times.size > 1 else 0.0)

    diag = _diagonal_form(T)
    atoms = tuple(detect_atoms(diag, params.mass_threshold)) if diag is not None else ()

    worst_tail = 0.0
    worst_cesaro = 0.0
    worst_cesaro_abs = 0.0
    worst_density = 1.0
    worst_wiener = 0.0 if diag is not None else None
    revival = False
    for x in normed:
        tr = correlation(T, x, x, times)
        absv = np.abs(tr.values)
        if np.any(absv[revival_window] > 1.0 - params.eps):
            revival = True
        worst_cesaro = max(worst_cesaro, cesaro_mean_abs2(tr))
        w = _trapezoid_weights(times)
        worst_cesaro_abs = max(worst_cesaro_abs, float((w * absv).sum() / w.sum()))
        worst_density = min(worst_density, density_estimate(tr, params.eps))
        if diag is not None:
            worst_wiener = max(worst_wiener, wiener_limit(diag, _to_diag_coords(T, x)))
    for i, x in enumerate(normed):
        for y in normed[i:]:
            tr = correlation(T, x, y, times)
            worst_tail = max(worst_tail, float(np.abs(tr.values[tail]).max()))

    if atoms or revival:
        verdict = "PointSpectrumDetected"
    elif worst_tail < params.eps:
        verdict = "WeaklyStableEvidence"
    elif (
        worst_density >= params.delta_density
        and min(worst_cesaro, worst_wiener if worst_wiener is not None else np.inf)
        <= params.delta_wiener
    ):
        verdict = "AlmostWeaklyStableEvidence"
    else:
        verdict = "Inconclusive"

    return StabilityReport(
        cesaro_abs=worst_cesaro_abs,
        cesaro_abs2=worst_cesaro,
        wiener_closed_form=worst_wiener,
        density_est=worst_density,
        atoms=atoms,
        verdict=verdict,
        tail_sup=worst_tail,
    )


def _to_diag_coords(T: SemigroupModel, x: HVector) -> HVector:
    """Express a witness in the diagonal model's coordinates."""
    if isinstance(T, MultiplicationGroup):
        return x
    assert isinstance(T, ConjugatedGroup)
    inner = T.inner
    z = T.basis @ (np.sqrt(T.grid.weights) * x.coeffs)
    return HVector(inner.grid, z / np.sqrt(inner.grid.weights))


def mt_membership(U: SemigroupModel, x: HVector, t: float) -> bool:
    """|<U(t)x, x>| <= 1/2 for a unit vector x."""
    if abs(x.norm() - 1.0) > 1e-12:
        raise ValueError("membership in M_t is defined for unit vectors")
    return abs(inner_product_aligned(U.apply(t, x), x)) <= 0.5


def wjkt_membership(U: SemigroupModel, x_j: HVector, k: int, t: float) -> bool:
    """|<U(t)x_j, x_j>| < 1/k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return abs(inner_product_aligned(U.apply(t, x_j), x_j)) < 1.0 / k
