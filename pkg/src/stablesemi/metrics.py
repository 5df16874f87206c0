"""The three semigroup metrics: strong* on unitary groups, strong on
isometric semigroups, weak on contractions.

Each is a doubly (or triply) truncated weighted series over a fixed witness
sequence; the discarded tail is certified in closed form (every numerator is
bounded by 2 times the witness norms), and the sup over continuous time is
sampled, with a Lipschitz slack reported whenever a frequency bound for both
models is available.  For models with discrete admissible times the sup runs
over exactly the admissible multiples of the step, so no slack is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import DenseSequence, difference_norm, inner_product_aligned
from .semigroups import SemigroupModel


@dataclass(frozen=True)
class MetricConfig:
    dense_seq: DenseSequence
    J: int = 12
    N: int = 12
    samples_per_block: int = 64

    def __post_init__(self):
        if not 1 <= self.J <= len(self.dense_seq):
            raise ValueError("J must satisfy 1 <= J <= len(dense_seq)")
        if self.N < 1 or self.samples_per_block < 2:
            raise ValueError("need N >= 1 and samples_per_block >= 2")


@dataclass(frozen=True)
class MetricValue:
    value: float
    truncation_bound: float
    sampling_slack: float | None  # None when the sup is exact (discrete times)

    def __float__(self) -> float:
        return self.value


def _tail_bound_double(J: int, N: int) -> float:
    # sum over (n > N or j > J) of 2 * 2^(-n-j)
    return 2.0 * (1.0 - (1.0 - 2.0 ** -J) * (1.0 - 2.0 ** -N))


def _tail_bound_triple(J: int, N: int) -> float:
    return 2.0 * (1.0 - (1.0 - 2.0 ** -J) ** 2 * (1.0 - 2.0 ** -N))


def _resolve_step(S: SemigroupModel, T: SemigroupModel) -> float | None:
    steps = {m.time_step for m in (S, T) if m.time_step is not None}
    if not steps:
        return None
    if len(steps) > 1:
        raise ValueError("models have incompatible time steps")
    return steps.pop()


def _times(cfg: MetricConfig, step: float | None, lo: float, hi: float) -> np.ndarray:
    if step is not None:
        k0 = int(np.ceil(lo / step - 1e-12))
        k1 = int(np.floor(hi / step + 1e-12))
        return np.arange(k0, k1 + 1) * step
    spb = cfg.samples_per_block
    # rational grid hits every integer block endpoint exactly
    return np.arange(round(lo * spb), round(hi * spb) + 1) / spb


def _lipschitz_slack(S: SemigroupModel, T: SemigroupModel, dt: float) -> float | None:
    fs, ft = S.max_frequency(), T.max_frequency()
    if fs is None or ft is None:
        return None
    # d/dt ||S(t)x - T(t)x|| <= (|q_S|_max + |q_T|_max) ||x||
    return (fs + ft) * dt / 2.0


def _block_sups(diffs: np.ndarray, times: np.ndarray, cfg: MetricConfig, forward: bool):
    """Per-(n, j) sampled sup of the difference table diffs[time, witness]."""
    sups = np.zeros((cfg.N, cfg.J))
    for n in range(1, cfg.N + 1):
        mask = (times <= n + 1e-12) if forward else (np.abs(times) <= n + 1e-12)
        sups[n - 1] = diffs[mask].max(axis=0)
    return sups


def _assemble(sups: np.ndarray, norms: np.ndarray, cfg: MetricConfig,
              tail: float, slack: float | None) -> MetricValue:
    n_idx = np.arange(1, cfg.N + 1)[:, None]
    j_idx = np.arange(1, cfg.J + 1)[None, :]
    weights = 2.0 ** (-(n_idx + j_idx))
    value = float((sups / norms[None, :] * weights).sum())
    total_slack = None
    if slack is not None:
        total_slack = float(min(slack, 2.0) * weights.sum())
    return MetricValue(value=value, truncation_bound=tail, sampling_slack=total_slack)


def _strong_metric(S, T, cfg: MetricConfig, forward: bool) -> MetricValue:
    step = _resolve_step(S, T)
    lo = 0.0 if forward else -float(cfg.N)
    times = _times(cfg, step, lo, float(cfg.N))
    witnesses = cfg.dense_seq.vectors[: cfg.J]
    norms = np.array([x.norm() for x in witnesses])
    diffs = np.zeros((times.size, cfg.J))
    for i, t in enumerate(times):
        for j, x in enumerate(witnesses):
            diffs[i, j] = difference_norm(S.apply(t, x), T.apply(t, x))
    sups = _block_sups(diffs, times, cfg, forward)
    slack = None if step is not None else _lipschitz_slack(S, T, float(times[1] - times[0]))
    return _assemble(sups, norms, cfg, _tail_bound_double(cfg.J, cfg.N), slack)


def metric_unitary(U: SemigroupModel, V: SemigroupModel, cfg: MetricConfig) -> MetricValue:
    """Strong* metric: sups over t in [-n, n] (adjoints come for free since
    U(-t) = U(t)* for unitary groups)."""
    if not (U.is_unitary and V.is_unitary):
        raise ValueError("metric_unitary requires unitary models")
    return _strong_metric(U, V, cfg, forward=False)


def metric_isometric(S: SemigroupModel, T: SemigroupModel, cfg: MetricConfig) -> MetricValue:
    """Strong metric on isometric semigroups: forward times only."""
    if not (S.is_isometric and T.is_isometric):
        raise ValueError("metric_isometric requires isometric models")
    return _strong_metric(S, T, cfg, forward=True)


def metric_contractive(S: SemigroupModel, T: SemigroupModel, cfg: MetricConfig) -> MetricValue:
    """Weak metric on contractions: triple-truncated sum over witness pairs."""
    step = _resolve_step(S, T)
    times = _times(cfg, step, 0.0, float(cfg.N))
    witnesses = cfg.dense_seq.vectors[: cfg.J]
    norms = np.array([x.norm() for x in witnesses])
    J = cfg.J
    diffs = np.zeros((times.size, J, J))
    for it, t in enumerate(times):
        sx = [S.apply(t, x) for x in witnesses]
        tx = [T.apply(t, x) for x in witnesses]
        for i in range(J):
            for j in range(J):
                diffs[it, i, j] = abs(
                    inner_product_aligned(sx[i], witnesses[j])
                    - inner_product_aligned(tx[i], witnesses[j])
                )
    value = 0.0
    for n in range(1, cfg.N + 1):
        sup_n = diffs[times <= n + 1e-12].max(axis=0)
        i_idx = np.arange(1, J + 1)[:, None]
        j_idx = np.arange(1, J + 1)[None, :]
        w = 2.0 ** (-(i_idx + j_idx + n))
        value += float((sup_n / (norms[:, None] * norms[None, :]) * w).sum())
    slack = None if step is not None else _lipschitz_slack(S, T, float(times[1] - times[0]))
    total_slack = None
    if slack is not None:
        i_idx = np.arange(1, J + 1)[:, None]
        j_idx = np.arange(1, J + 1)[None, :]
        wsum = sum(
            (2.0 ** (-(i_idx + j_idx + n))).sum() for n in range(1, cfg.N + 1)
        )
        total_slack = float(min(2.0 * slack, 2.0) * wsum)
    return MetricValue(
        value=value,
        truncation_bound=_tail_bound_triple(cfg.J, cfg.N),
        sampling_slack=total_slack,
    )
