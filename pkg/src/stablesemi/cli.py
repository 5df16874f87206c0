"""Scenario runner: reproducible experiments over the library, with CSV row
output and JSON summaries.

Scenarios: bound-verification sweeps for the quantization and near-identity
bounds, the exact shift-periodization identity, the Cantor-measure witness
for almost weak stability, the category-escape demonstration, Wold recovery
benchmarks, and metric convergence tables.

Usage: stablesemi run <config.json> [--out DIR] [--seed N] [--quiet]

Exit codes: 0 = all bounds held, 1 = a bound was violated, 2 = config error.
Config files are flat JSON objects with a `scenario` discriminator; unknown
keys are errors.  The seed fully determines all randomized inputs, so a
fixed config yields byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .constructions import (
    inflate_and_perturb,
    periodization_error_identity,
    near_identity_aws,
    quantization_distance,
    quantize_symbol,
    wold_decompose,
)
from .diagnostics import cesaro_mean_abs2, CorrelationTrace, mt_membership, wjkt_membership
from .hilbert import DenseSequence, HVector, SumSpace, WeightedGrid
from .metrics import MetricConfig, metric_unitary
from .semigroups import (
    ConjugatedGroup,
    DirectSumSemigroup,
    MultiplicationGroup,
    ShiftSemigroup,
    shift_grid,
)

ENV_OUT_DIR = "STABLESEMI_OUT"


class ConfigError(ValueError):
    pass


# --- Cantor measure oracle ---------------------------------------------------

def cantor_transform_abs(t, factor_tol: float = 1e-14) -> np.ndarray:
    """|Fourier-Stieltjes transform| of the middle-thirds Cantor measure.

    Product formula |gamma(t)| = prod_{k>=1} |cos(t / 3^k)|, truncated at the
    depth where every remaining factor is within factor_tol of 1.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    tmax = max(float(np.abs(t).max()), 1.0)
    depth = max(1, math.ceil(math.log(tmax / math.sqrt(2.0 * factor_tol)) / math.log(3.0)))
    out = np.ones_like(t)
    for k in range(1, depth + 1):
        out *= np.abs(np.cos(t / 3.0 ** k))
    return out


def cantor_group(depth: int) -> MultiplicationGroup:
    """Multiplication group on the depth-d Cantor approximation grid.

    2^d atoms (left endpoints of the surviving intervals) with uniform
    weights; the symbol is the atom position, so the autocorrelation of the
    uniform unit vector is the depth-d truncated product formula.
    """
    if depth < 1:
        raise ConfigError("cantor depth must be >= 1")
    bits = np.arange(2 ** depth)[:, None] >> np.arange(depth)[None, :] & 1
    pts = (bits * (2.0 / 3.0 ** np.arange(1, depth + 1))).sum(axis=1)
    grid = WeightedGrid(pts, np.full(2 ** depth, 2.0 ** -depth))
    return MultiplicationGroup(grid, pts)


# --- helpers -----------------------------------------------------------------

def _random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_symbol(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * np.pi, dim)


def _loglog_slope(ns, errs) -> float:
    ln, le = np.log(np.asarray(ns, float)), np.log(np.asarray(errs, float))
    return float(np.polyfit(ln, le, 1)[0])


# --- scenarios ---------------------------------------------------------------

def run_quantization_sweep(cfg: dict, rng: np.random.Generator):
    dim, trials, t_max = cfg["dimension"], cfg["trials"], cfg["t_max"]
    n_values = cfg["n_values"]
    grid = WeightedGrid.uniform(dim, 1.0 / dim)
    rows, violations = [], 0
    max_err = {n: 0.0 for n in n_values}
    for _ in range(trials):
        n = int(rng.choice(n_values))
        t = float(rng.uniform(-t_max, t_max))
        U = MultiplicationGroup(grid, _random_symbol(rng, dim))
        V = quantize_symbol(U, n).approximant
        measured = quantization_distance(U, V, t)
        bound = 2.0 * np.pi * abs(t) / n
        ratio = measured / bound if bound > 0 else 0.0
        if measured > bound * (1.0 + 1e-12):
            violations += 1
        max_err[n] = max(max_err[n], measured)
        rows.append({"n": n, "t": t, "measured_dist": measured, "bound": bound, "ratio": ratio})
    # fit the rate only where the bound is below the trivial cap of 2
    fit_ns = [n for n in n_values if 2.0 * np.pi * t_max / n < 2.0 and max_err[n] > 0]
    slope = _loglog_slope(fit_ns, [max_err[n] for n in fit_ns]) if len(fit_ns) >= 2 else float("nan")
    summary = {
        "violations": violations,
        "slope": slope,
        "fit_n_values": fit_ns,
        "max_error_per_n": {str(n): max_err[n] for n in n_values},
    }
    return rows, summary, violations == 0


def run_near_identity_sweep(cfg: dict, rng: np.random.Generator):
    dim, n_values, t_samples = cfg["dimension"], cfg["n_values"], cfg["t_samples"]
    grid = WeightedGrid(np.sort(rng.uniform(0, 1, dim)), np.full(dim, 1.0 / dim))
    rows, violations = [], 0
    for n in n_values:
        U = near_identity_aws(grid, n)
        for t in np.linspace(0.0, np.pi * n, t_samples):
            measured = float(np.abs(np.exp(1j * t * U.symbol) - 1.0).max())
            bound = 2.0 * t / n
            if measured > bound * (1.0 + 1e-12) + 1e-15:
                violations += 1
            rows.append({"n": n, "t": float(t), "measured_dist": measured, "bound": bound})
    return rows, {"violations": violations}, violations == 0


def run_shift_periodization_check(cfg: dict, rng: np.random.Generator):
    cells, n_c, trials = cfg["cells"], cfg["period_cells"], cfg["trials"]
    fiber = cfg["fiber_dim"]
    R = ShiftSemigroup(step=1.0, cells=cells, fiber_dim=fiber)
    grid = shift_grid(cells, 1.0, fiber)
    rows, worst_gap, tail_violations = [], 0.0, 0
    for trial in range(trials):
        c = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        f = HVector(grid, c)
        ell = int(rng.integers(1, n_c))
        lhs, rhs, tail = periodization_error_identity(R, n_c, f, float(ell))
        gap = abs(lhs - rhs) / max(rhs, 1e-300)
        worst_gap = max(worst_gap, gap)
        if lhs > tail * (1.0 + 1e-12):
            tail_violations += 1
        rows.append({
            "trial": trial, "t": ell, "error_sq": lhs,
            "identity_rhs": rhs, "tail_bound": tail, "rel_gap": gap,
        })
    ok = worst_gap <= 1e-12
    summary = {
        "worst_identity_gap": worst_gap,
        "factor2_tail_violations": tail_violations,
    }
    return rows, summary, ok


def run_wold_benchmark(cfg: dict, rng: np.random.Generator):
    trials = cfg["trials"]
    rows, ok = [], True
    import scipy.linalg
    for trial in range(trials):
        du = int(rng.integers(cfg["min_unitary_dim"], cfg["max_unitary_dim"] + 1))
        nc = int(rng.integers(cfg["min_shift_cells"], cfg["max_shift_cells"] + 1))
        freqs = rng.uniform(-np.pi / 2, np.pi / 2, du)
        gu = WeightedGrid.uniform(du)
        gs = shift_grid(nc, 1.0)
        space = SumSpace((gu, gs))
        inner = DirectSumSemigroup(
            space, (MultiplicationGroup(gu, freqs), ShiftSemigroup(1.0, nc)))
        dim = space.dimension
        Q = _random_unitary(rng, dim)
        outer = WeightedGrid.uniform(dim)
        V = ConjugatedGroup(outer, Q, inner)
        wr = wold_decompose(V, max_iter=dim + 5, tol=1e-10, step=1.0)
        rec = wr.unitary_dim
        # ground truth: H0 is the image of the unitary block under Q*
        truth = Q.conj().T[:, :du]
        if rec == du and du > 0:
            B0 = np.column_stack([v.coeffs for v in wr.unitary_basis])
            angle = float(np.max(scipy.linalg.subspace_angles(B0, truth)))
        elif rec == du:
            angle = 0.0
        else:
            angle = float("nan")
        good = rec == du and (du == 0 or angle <= 1e-8)
        ok = ok and good
        rows.append({
            "trial": trial, "true_dim_H0": du, "recovered_dim": rec,
            "max_principal_angle": angle, "residual": wr.residual,
        })
    return rows, {"all_exact": ok}, ok


def run_cantor_demo(cfg: dict, rng: np.random.Generator):
    depth, horizon = cfg["depth"], cfg["horizon"]
    num = cfg["num_samples"]
    stride = cfg["row_stride"]
    times = np.linspace(0.0, horizon, num)
    oracle = cantor_transform_abs(times)
    group = cantor_group(depth)
    unit = HVector(group.grid, np.ones(group.grid.size))
    # autocorrelation of the uniform unit vector, in closed diagonal form
    disc = np.abs(
        np.exp(1j * np.outer(times, group.grid.points)) @ group.grid.weights
    )
    gap = float(np.abs(oracle - disc).max())
    trace = CorrelationTrace(times, disc.astype(complex))
    ces = cesaro_mean_abs2(trace)
    tail = times >= horizon / 2.0
    tail_sup = float(oracle[tail].max())
    rows = [
        {"t": float(t), "abs_corr_product": float(o), "abs_corr_discrete": float(d)}
        for t, o, d in zip(times[::stride], oracle[::stride], disc[::stride])
    ]
    ok = ces <= 0.05 and tail_sup >= 0.2
    summary = {
        "cesaro_abs2": ces,
        "tail_sup": tail_sup,
        "discretization_gap": gap,
        "witness_norm": unit.norm(),
    }
    return rows, summary, ok


def run_category_escape(cfg: dict, rng: np.random.Generator):
    dim, base_level = cfg["dimension"], cfg["base_level"]
    n_values, multiples = cfg["n_values"], cfg["multiples"]
    j_count, k_max = cfg["witnesses"], cfg["k_max"]
    eps, t0, copies = cfg["eps"], cfg["t0"], cfg["copies"]

    grid = WeightedGrid.uniform(dim, 1.0 / dim)
    U = MultiplicationGroup(grid, _random_symbol(rng, dim))
    x = HVector(grid, np.ones(dim))  # unit witness for the M_t escape
    seq = DenseSequence.gaussian(grid, max(j_count, 6), seed=int(rng.integers(2 ** 31)))
    mcfg = MetricConfig(seq, J=min(6, j_count), N=6, samples_per_block=32)

    rows, ok = [], True
    prev = None
    for n in n_values:
        Vn = quantize_symbol(U, n).approximant
        d = metric_unitary(U, Vn, mcfg).value
        for m in range(1, multiples + 1):
            val = abs(
                complex((grid.weights * np.exp(1j * m * n * Vn.symbol) * np.abs(x.coeffs) ** 2).sum())
            )
            escaped = not mt_membership(Vn, x, m * n)
            ok = ok and escaped and val > 0.5
            rows.append({
                "table": "escape", "n": n, "t": m * n, "witness": -1,
                "value": val, "escaped": escaped, "metric_to_base": d,
            })
        if prev is not None and d > prev + 1e-9:
            ok = False
        prev = d

    # residual mechanism: the perturbed group enters W_{jk} for all witnesses
    jcell = 2.0 * np.pi / base_level
    base = MultiplicationGroup(grid, jcell * np.floor(U.symbol / jcell))
    infl = inflate_and_perturb(base, [], eps, t0, copies=copies)
    aws = MultiplicationGroup(grid, infl.compressed().symbol)
    t_sweep = np.unique(np.concatenate([
        np.linspace(1.0, 200.0, 200),
        np.exp(rng.uniform(np.log(10.0), np.log(1e5), 400)),
    ]))
    for j in range(j_count):
        xj = seq[j]
        vals = np.abs([
            complex((grid.weights * np.exp(1j * t * aws.symbol)
                     * np.abs(xj.coeffs) ** 2).sum()) for t in t_sweep
        ]) / xj.norm() ** 2
        best_t = float(t_sweep[int(np.argmin(vals))])
        entered = bool(vals.min() < 1.0 / k_max) and wjkt_membership(
            aws, xj.normalized(), k_max, best_t)
        ok = ok and entered
        rows.append({
            "table": "aws", "n": base_level, "t": best_t, "witness": j,
            "value": float(vals.min()), "escaped": entered, "metric_to_base": float("nan"),
        })
    summary = {"all_escaped_and_entered": ok, "frequencies_distinct": infl.frequencies_distinct}
    return rows, summary, ok


def run_metric_tables(cfg: dict, rng: np.random.Generator):
    dim, n_values = cfg["dimension"], cfg["n_values"]
    grid = WeightedGrid.uniform(dim, 1.0 / dim)
    U = MultiplicationGroup(grid, _random_symbol(rng, dim))
    seq = DenseSequence.gaussian(grid, cfg["J"], seed=int(rng.integers(2 ** 31)))
    mcfg = MetricConfig(seq, J=cfg["J"], N=cfg["N"], samples_per_block=cfg["samples_per_block"])
    rows, ok, prev = [], True, None
    for n in n_values:
        Vn = quantize_symbol(U, n).approximant
        mv = metric_unitary(U, Vn, mcfg)
        if prev is not None and mv.value > prev + 1e-9:
            ok = False
        prev = mv.value
        rows.append({
            "n": n, "metric_value": mv.value,
            "truncation_bound": mv.truncation_bound,
            "sampling_slack": mv.sampling_slack,
        })
    return rows, {"monotone": ok}, ok


SCENARIOS = {
    "quantization_sweep": (
        run_quantization_sweep,
        {"dimension": 32, "trials": 10000, "t_max": 10.0,
         "n_values": [8, 16, 32, 64, 128, 256, 512, 1024]},
    ),
    "near_identity_sweep": (
        run_near_identity_sweep,
        {"dimension": 32, "n_values": [4, 64, 512], "t_samples": 200},
    ),
    "shift_periodization_check": (
        run_shift_periodization_check,
        {"cells": 48, "period_cells": 32, "trials": 200, "fiber_dim": 1},
    ),
    "wold_benchmark": (
        run_wold_benchmark,
        {"trials": 20, "min_unitary_dim": 1, "max_unitary_dim": 10,
         "min_shift_cells": 5, "max_shift_cells": 50},
    ),
    "cantor_demo": (
        run_cantor_demo,
        {"depth": 12, "horizon": 10000.0, "num_samples": 200001, "row_stride": 1000},
    ),
    "category_escape": (
        run_category_escape,
        {"dimension": 24, "base_level": 64, "n_values": [64, 128, 256, 512],
         "multiples": 3, "witnesses": 6, "k_max": 3,
         "eps": 0.25, "t0": 5.0, "copies": 2},
    ),
    "metric_tables": (
        run_metric_tables,
        {"dimension": 24, "n_values": [64, 128, 256, 512],
         "J": 8, "N": 6, "samples_per_block": 32},
    ),
}


def load_config(path: Path) -> dict:
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a flat JSON object")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; choose one of {sorted(SCENARIOS)}")
    _, defaults = SCENARIOS[scenario]
    allowed = set(defaults) | {"scenario", "seed", "csv_name", "json_name"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for {scenario}: {sorted(unknown)}")
    cfg = dict(defaults)
    cfg.update(raw)
    cfg.setdefault("seed", 0)
    return cfg


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_outputs(cfg: dict, rows, summary: dict, ok: bool, out_dir: Path, quiet: bool):
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = cfg["scenario"]
    csv_path = out_dir / cfg.get("csv_name", f"{scenario}.csv")
    json_path = out_dir / cfg.get("json_name", f"{scenario}_summary.json")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _fmt(v) for k, v in row.items()})
    doc = {
        "scenario": scenario,
        "seed": cfg["seed"],
        "rows": len(rows),
        "bounds_ok": ok,
        "metrics": summary,
    }
    json_path.write_text(json.dumps(doc, indent=2, default=str) + "\n")
    if not quiet:
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {scenario}: {len(rows)} rows -> {csv_path}")
        for key, val in summary.items():
            print(f"    {key} = {val}")
    return csv_path, json_path


def run_scenario(cfg: dict, out_dir: Path, quiet: bool = False) -> int:
    fn, _ = SCENARIOS[cfg["scenario"]]
    rng = np.random.default_rng(cfg["seed"])
    rows, summary, ok = fn(cfg, rng)
    write_outputs(cfg, rows, summary, ok, out_dir, quiet)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stablesemi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a scenario config")
    runp.add_argument("config", type=Path)
    runp.add_argument("--out", type=Path, default=None, help="output directory")
    runp.add_argument("--seed", type=int, default=None, help="override the config seed")
    runp.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["seed"] = args.seed
    out_dir = args.out or Path(os.environ.get(ENV_OUT_DIR, "."))
    return run_scenario(cfg, out_dir, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
