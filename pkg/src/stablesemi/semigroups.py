"""Concrete semigroup representations with a uniform apply/adjoint interface.

Four structural models cover everything the constructions produce:
multiplication (spectral) groups, truncated right shifts, periodic circular
shifts, and blockwise direct sums.  A fifth wrapper conjugates a model by a
unitary basis change, which is how mixed/benchmark operators and the outputs
of the Wold-based approximation pipeline are represented on their original
ambient space.

Shift conventions: admissible times are integer multiples of the cell step h;
applying a truncated right shift EXTENDS the payload grid by the shifted
cells instead of dropping mass, so isometry is exact.  Inside a direct sum
the ambient space is fixed, so there the overflow of a shift block is
truncated (that truncated one-step map is exactly what the Wold analysis
needs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    GridMismatchError,
    HVector,
    SumSpace,
    WeightedGrid,
    difference_norm,
    inner_product,
)


class InadmissibleTimeError(ValueError):
    """The requested time is not in the model's admissible set."""


def _shift_steps(t: float, h: float) -> int:
    ell = int(round(t / h))
    if abs(t - ell * h) > 1e-9 * max(1.0, abs(t)):
        raise InadmissibleTimeError(f"t={t} is not an integer multiple of step {h}")
    return ell


def shift_grid(cells: int, step: float, fiber_dim: int = 1) -> WeightedGrid:
    """Cell-major grid for L2([0, cells*h), C^m): weight h per entry."""
    pts = np.repeat(np.arange(cells, dtype=float) * step, fiber_dim)
    return WeightedGrid(pts, np.full(cells * fiber_dim, step))


class SemigroupModel:
    """Common interface; concrete models subclass this."""

    is_unitary: bool = False
    is_isometric: bool = False

    def apply(self, t: float, x: HVector) -> HVector:
        raise NotImplementedError

    def adjoint_apply(self, t: float, x: HVector) -> HVector:
        raise NotImplementedError

    def admissible(self, t: float) -> bool:
        raise NotImplementedError

    @property
    def grid(self) -> WeightedGrid:
        raise NotImplementedError

    @property
    def time_step(self):
        """Smallest positive admissible step, or None if all reals admissible."""
        return None

    def max_frequency(self):
        """Upper bound on the generator's spectral radius, when available."""
        return None


@dataclass(frozen=True)
class MultiplicationGroup(SemigroupModel):
    """(U(t)x)_k = exp(i t q_k) x_k on a weighted grid; always unitary."""

    _grid: WeightedGrid
    symbol: np.ndarray
    is_unitary: bool = field(default=True, init=False)
    is_isometric: bool = field(default=True, init=False)

    def __post_init__(self):
        q = np.ascontiguousarray(np.asarray(self.symbol, dtype=float))
        if q.shape != (self._grid.size,):
            raise ValueError("symbol length must equal grid size")
        q.setflags(write=False)
        object.__setattr__(self, "symbol", q)

    @property
    def grid(self) -> WeightedGrid:
        return self._grid

    def admissible(self, t: float) -> bool:
        return True

    def apply(self, t: float, x: HVector) -> HVector:
        if not x.grid.same_as(self._grid):
            raise GridMismatchError("vector does not live on the model's grid")
        return HVector(self._grid, np.exp(1j * t * self.symbol) * x.coeffs)

    def adjoint_apply(self, t: float, x: HVector) -> HVector:
        return self.apply(-t, x)

    def max_frequency(self) -> float:
        return float(np.abs(self.symbol).max())


@dataclass(frozen=True)
class ShiftSemigroup(SemigroupModel):
    """Truncated right shift on cell-major payloads; isometric, not unitary.

    `cells` is the nominal payload size; apply accepts any payload whose
    grid extends the nominal one and returns a payload extended by the
    shifted cells.
    """

    step: float
    cells: int
    fiber_dim: int = 1
    is_unitary: bool = field(default=False, init=False)
    is_isometric: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.step <= 0 or self.cells < 1 or self.fiber_dim < 1:
            raise ValueError("need step > 0, cells >= 1, fiber_dim >= 1")

    @property
    def grid(self) -> WeightedGrid:
        return shift_grid(self.cells, self.step, self.fiber_dim)

    @property
    def time_step(self) -> float:
        return self.step

    def admissible(self, t: float) -> bool:
        if t < -1e-12:
            return False
        try:
            _shift_steps(t, self.step)
        except InadmissibleTimeError:
            return False
        return True

    def _payload_cells(self, x: HVector) -> int:
        m = self.fiber_dim
        if x.grid.size % m != 0 or not np.allclose(x.grid.weights, self.step):
            raise GridMismatchError("payload grid is not shift-compatible")
        return x.grid.size // m

    def apply(self, t: float, x: HVector) -> HVector:
        if t < -1e-12:
            raise InadmissibleTimeError("right shift only admits t >= 0")
        ell = _shift_steps(t, self.step)
        n = self._payload_cells(x)
        m = self.fiber_dim
        out = np.zeros((n + ell) * m, dtype=complex)
        out[ell * m :] = x.coeffs
        return HVector(shift_grid(n + ell, self.step, m), out)

    def adjoint_apply(self, t: float, x: HVector) -> HVector:
        if t < -1e-12:
            raise InadmissibleTimeError("right shift only admits t >= 0")
        ell = _shift_steps(t, self.step)
        n = self._payload_cells(x)
        m = self.fiber_dim
        out = np.zeros(n * m, dtype=complex)
        if ell < n:
            out[: (n - ell) * m] = x.coeffs[ell * m :]
        return HVector(shift_grid(n, self.step, m), out)


@dataclass(frozen=True)
class PeriodicShiftGroup(SemigroupModel):
    """Circular shift on the first `period_cells` cells, identity above.

    Unitary with period period_cells * step; a group, so negative times are
    admissible.
    """

    period_cells: int
    step: float
    fiber_dim: int = 1
    is_unitary: bool = field(default=True, init=False)
    is_isometric: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.step <= 0 or self.period_cells < 1 or self.fiber_dim < 1:
            raise ValueError("need step > 0, period_cells >= 1, fiber_dim >= 1")

    @property
    def period(self) -> float:
        return self.period_cells * self.step

    @property
    def grid(self) -> WeightedGrid:
        return shift_grid(self.period_cells, self.step, self.fiber_dim)

    @property
    def time_step(self) -> float:
        return self.step

    def admissible(self, t: float) -> bool:
        try:
            _shift_steps(t, self.step)
        except InadmissibleTimeError:
            return False
        return True

    def apply(self, t: float, x: HVector) -> HVector:
        ell = _shift_steps(t, self.step)
        m = self.fiber_dim
        if x.grid.size % m != 0 or not np.allclose(x.grid.weights, self.step):
            raise GridMismatchError("payload grid is not shift-compatible")
        n = x.grid.size // m
        nc = self.period_cells
        if n < nc:
            c = np.zeros(nc * m, dtype=complex)
            c[: x.grid.size] = x.coeffs
            n = nc
        else:
            c = x.coeffs.copy()
        cells = c[: nc * m].reshape(nc, m)
        c[: nc * m] = np.roll(cells, ell % nc, axis=0).reshape(-1)
        return HVector(shift_grid(n, self.step, m), c)

    def adjoint_apply(self, t: float, x: HVector) -> HVector:
        return self.apply(-t, x)


@dataclass(frozen=True)
class DirectSumSemigroup(SemigroupModel):
    """Blockwise action on a fixed sum space.

    Shift blocks keep the ambient space fixed: overflow cells are dropped, so
    the one-step map of a shift block is the truncated shift matrix.
    """

    space: SumSpace
    parts: tuple[SemigroupModel, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if len(parts) != len(self.space.components):
            raise ValueError("one part per component grid required")
        object.__setattr__(self, "parts", parts)

    @property
    def is_unitary(self) -> bool:
        return all(p.is_unitary for p in self.parts)

    @property
    def is_isometric(self) -> bool:
        return all(p.is_isometric for p in self.parts)

    @property
    def grid(self) -> WeightedGrid:
        return self.space.combined

    @property
    def time_step(self):
        steps = {p.time_step for p in self.parts if p.time_step is not None}
        if not steps:
            return None
        if len(steps) > 1:
            raise ValueError("parts with different time steps are not supported")
        return steps.pop()

    def admissible(self, t: float) -> bool:
        return all(p.admissible(t) for p in self.parts)

    def max_frequency(self):
        freqs = [p.max_frequency() for p in self.parts]
        known = [f for f in freqs if f is not None]
        return max(known) if known else None

    def apply(self, t: float, x: HVector) -> HVector:
        return self._blockwise(t, x, adjoint=False)

    def adjoint_apply(self, t: float, x: HVector) -> HVector:
        return self._blockwise(t, x, adjoint=True)

    def _blockwise(self, t: float, x: HVector, adjoint: bool) -> HVector:
        if not x.grid.same_as(self.space.combined):
            raise GridMismatchError("vector does not live on the sum space")
        out = np.zeros(self.space.dimension, dtype=complex)
        for b, part in enumerate(self.parts):
            xb = self.space.restrict(b, x)
            yb = part.adjoint_apply(t, xb) if adjoint else part.apply(t, xb)
            size = self.space.components[b].size
            out[self.space.block_slice(b)] = yb.coeffs[:size]
        return HVector(self.space.combined, out)


@dataclass(frozen=True)
class ConjugatedGroup(SemigroupModel):
    """B* inner(t) B, with B unitary in weighted coordinates.

    `basis` maps outer weighted coordinates (sqrt(mu) * coeffs) to inner
    weighted coordinates.  The inner model must preserve dimension for all
    admissible times (multiplication groups, periodic shifts and their sums).
    """

    _grid: WeightedGrid
    basis: np.ndarray
    inner: SemigroupModel

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.basis, dtype=complex))
        k = self._grid.size
        if b.shape != (self.inner.grid.size, k):
            raise ValueError("basis shape must be (inner dim, outer dim)")
        if b.shape[0] != k:
            raise ValueError("conjugation requires equal inner and outer dimension")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def is_unitary(self) -> bool:
        return self.inner.is_unitary

    @property
    def is_isometric(self) -> bool:
        return self.inner.is_isometric

    @property
    def grid(self) -> WeightedGrid:
        return self._grid

    @property
    def time_step(self):
        return self.inner.time_step

    def admissible(self, t: float) -> bool:
        return self.inner.admissible(t)

    def max_frequency(self):
        return self.inner.max_frequency()

    def _conjugate(self, t: float, x: HVector, adjoint: bool) -> HVector:
        if not x.grid.same_as(self._grid):
            raise GridMismatchError("vector does not live on the model's grid")
        sw_out = np.sqrt(self._grid.weights)
        sw_in = np.sqrt(self.inner.grid.weights)
        z = self.basis @ (sw_out * x.coeffs)
        xi = HVector(self.inner.grid, z / sw_in)
        yi = self.inner.adjoint_apply(t, xi) if adjoint else self.inner.apply(t, xi)
        if yi.grid.size != self.inner.grid.size:
            raise ValueError("inner model changed dimension under conjugation")
        zo = self.basis.conj().T @ (sw_in * yi.coeffs)
        return HVector(self._grid, zo / sw_out)

    def apply(self, t: float, x: HVector) -> HVector:
        return self._conjugate(t, x, adjoint=False)

    def adjoint_apply(self, t: float, x: HVector) -> HVector:
        return self._conjugate(t, x, adjoint=True)


def check_semigroup_law(
    T: SemigroupModel, t: float, s: float, x: HVector, tol: float
) -> bool:
    """||T(t+s)x - T(t)T(s)x|| <= tol * ||x||."""
    lhs = T.apply(t + s, x)
    rhs = T.apply(t, T.apply(s, x))
    return difference_norm(lhs, rhs) <= tol * x.norm()


def check_isometry(T: SemigroupModel, t: float, sample, tol: float) -> bool:
    return all(abs(T.apply(t, x).norm() - x.norm()) <= tol * max(x.norm(), 1.0) for x in sample)


def check_unitarity(T: SemigroupModel, t: float, sample, tol: float) -> bool:
    if not check_isometry(T, t, sample, tol):
        return False
    for x in sample:
        scale = tol * max(x.norm(), 1.0)
        y = T.apply(t, x)
        if y.grid.size != x.grid.size:
            return False
        if difference_norm(T.adjoint_apply(t, y), x) > scale:
            return False
        if difference_norm(T.apply(t, T.adjoint_apply(t, x)), x) > scale:
            return False
    return True


def one_step_matrix(T: SemigroupModel, h: float) -> np.ndarray:
    """Matrix of T(h) in weighted coordinates on the model's nominal grid.

    Overflow of extending shifts is truncated, so the result always has the
    nominal dimension.
    """
    g = T.grid
    k = g.size
    sw = np.sqrt(g.weights)
    W = np.zeros((k, k), dtype=complex)
    for j in range(k):
        e = np.zeros(k, dtype=complex)
        e[j] = 1.0 / sw[j]
        y = T.apply(h, HVector(g, e))
        W[:, j] = (np.sqrt(y.grid.weights) * y.coeffs)[:k]
    return W


# --- serialization (CLI round-tripping) -------------------------------------

def _grid_to_dict(g: WeightedGrid) -> dict:
    return {"points": g.points.tolist(), "weights": g.weights.tolist()}


def _grid_from_dict(d: dict) -> WeightedGrid:
    return WeightedGrid(np.asarray(d["points"]), np.asarray(d["weights"]))


def model_to_dict(T: SemigroupModel) -> dict:
    if isinstance(T, MultiplicationGroup):
        return {
            "kind": "multiplication",
            "grid": _grid_to_dict(T.grid),
            "symbol": T.symbol.tolist(),
        }
    if isinstance(T, ShiftSemigroup):
        return {
            "kind": "shift",
            "step": T.step,
            "cells": T.cells,
            "fiber_dim": T.fiber_dim,
        }
    if isinstance(T, PeriodicShiftGroup):
        return {
            "kind": "periodic_shift",
            "period_cells": T.period_cells,
            "step": T.step,
            "fiber_dim": T.fiber_dim,
        }
    if isinstance(T, DirectSumSemigroup):
        return {
            "kind": "direct_sum",
            "parts": [model_to_dict(p) for p in T.parts],
            "grids": [_grid_to_dict(g) for g in T.space.components],
        }
    if isinstance(T, ConjugatedGroup):
        return {
            "kind": "conjugated",
            "grid": _grid_to_dict(T.grid),
            "basis_re": T.basis.real.tolist(),
            "basis_im": T.basis.imag.tolist(),
            "inner": model_to_dict(T.inner),
        }
    raise TypeError(f"cannot serialize {type(T).__name__}")


def model_from_dict(d: dict) -> SemigroupModel:
    kind = d["kind"]
    if kind == "multiplication":
        return MultiplicationGroup(_grid_from_dict(d["grid"]), np.asarray(d["symbol"]))
    if kind == "shift":
        return ShiftSemigroup(d["step"], d["cells"], d.get("fiber_dim", 1))
    if kind == "periodic_shift":
        return PeriodicShiftGroup(d["period_cells"], d["step"], d.get("fiber_dim", 1))
    if kind == "direct_sum":
        space = SumSpace(tuple(_grid_from_dict(g) for g in d["grids"]))
        return DirectSumSemigroup(space, tuple(model_from_dict(p) for p in d["parts"]))
    if kind == "conjugated":
        basis = np.asarray(d["basis_re"]) + 1j * np.asarray(d["basis_im"])
        return ConjugatedGroup(_grid_from_dict(d["grid"]), basis, model_from_dict(d["inner"]))
    raise ValueError(f"unknown model kind {kind!r}")
