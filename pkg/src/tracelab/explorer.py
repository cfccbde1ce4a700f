"""Randomized ensembles, parameter sweeps, counterexample search and
conjecture probing over the inequality catalog.

Sweeps are deterministic: cell i, trial j always evaluates the matrices drawn
from seed base_seed + i*10**6 + j, so any record can be reproduced from its
(case, cell, index) coordinates and cells are seed-isolated from each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
import numpy as np

from . import funclass as fc
from . import ineq
from . import matcore as mc
from .ineq import DEFAULT_TOL_REL, TrialRecord
from .matcore import DomainError, GeneralMatrix, HermitianMatrix

__all__ = [
    "SweepPlan",
    "CellSummary",
    "SweepSummary",
    "run_sweep",
    "evaluate_case",
    "draw_inputs",
    "repro_counterexample",
    "repro_closed_forms",
    "COUNTEREXAMPLE_A",
    "COUNTEREXAMPLE_B",
    "search_counterexample",
    "probe_conjecture",
    "CONJECTURE_REGIONS",
    "SWEEP_CSV_HEADER",
]

SWEEP_CSV_HEADER = "case,q,dim,ensemble,trials,violations,min_gap,worst_seed"

CELL_SEED_STRIDE = 10**6

# Gaussian refinement inside search_counterexample.
SEARCH_REFINE_STEPS = 50
SEARCH_INITIAL_STEP = 0.5


@dataclass(frozen=True)
class SweepPlan:
    """One sweep: a case evaluated over a (q, dim) grid of seeded cells."""

    case: str
    q_grid: tuple[float | None, ...]
    dims: tuple[int, ...]
    trials_per_cell: int
    ensemble: str = "wishart"
    base_seed: int = 42
    func: fc.ScalarFunction | None = None
    tol_rel: float = DEFAULT_TOL_REL

    def __post_init__(self):
        if self.case not in ineq.CASES:
            raise ValueError(f"unknown case {self.case!r}; choose from {sorted(ineq.CASES)}")
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if not self.q_grid or not self.dims:
            raise ValueError("q_grid and dims must be non-empty")
        if self.ensemble not in mc.ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if ineq.CASES[self.case].needs == "pair+func" and self.func is None:
            raise ValueError(f"case {self.case} needs a scalar function spec")
        object.__setattr__(self, "q_grid", tuple(self.q_grid))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    def cells(self) -> list[tuple[float | None, int]]:
        return [(q, d) for q in self.q_grid for d in self.dims]

    def to_json(self) -> dict:
        out = {
            "case": self.case,
            "q_grid": list(self.q_grid),
            "dims": list(self.dims),
            "trials_per_cell": self.trials_per_cell,
            "ensemble": self.ensemble,
            "base_seed": self.base_seed,
            "tol_rel": self.tol_rel,
        }
        if self.func is not None:
            out["func"] = self.func.to_json()
        return out


@dataclass(frozen=True)
class CellSummary:
    case: str
    q: float | None
    dim: int
    ensemble: str
    trials: int
    violations: int
    skipped: int
    conjecture: int
    min_gap: float | None
    max_gap: float | None
    worst_seed: int | None
    worst: TrialRecord | None = field(repr=False)

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "q": self.q,
            "dim": self.dim,
            "ensemble": self.ensemble,
            "trials": self.trials,
            "violations": self.violations,
            "skipped": self.skipped,
            "conjecture": self.conjecture,
            "min_gap": self.min_gap,
            "max_gap": self.max_gap,
            "worst_seed": self.worst_seed,
            "worst": self.worst.to_json() if self.worst is not None else None,
        }

    def csv_row(self) -> str:
        qtxt = "" if self.q is None else repr(float(self.q))
        min_gap = "" if self.min_gap is None else repr(self.min_gap)
        worst_seed = "" if self.worst_seed is None else str(self.worst_seed)
        return (
            f"{self.case},{qtxt},{self.dim},{self.ensemble},"
            f"{self.trials},{self.violations},{min_gap},{worst_seed}"
        )


@dataclass(frozen=True)
class SweepSummary:
    plan: SweepPlan
    cells: tuple[CellSummary, ...]

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.cells)

    @property
    def verdict(self) -> str:
        return "PASS" if self.violations == 0 else "FAIL"

    @property
    def min_gap(self) -> float | None:
        gaps = [c.min_gap for c in self.cells if c.min_gap is not None]
        return min(gaps) if gaps else None

    def worst_record(self) -> TrialRecord | None:
        worst = None
        for c in self.cells:
            if c.worst is not None and (worst is None or c.worst.gap < worst.gap):
                worst = c.worst
        return worst

    def to_json(self) -> dict:
        return {
            "plan": self.plan.to_json(),
            "verdict": self.verdict,
            "violations": self.violations,
            "min_gap": self.min_gap,
            "cells": [c.to_json() for c in self.cells],
        }

    def to_csv(self) -> str:
        lines = [SWEEP_CSV_HEADER]
        lines.extend(c.csv_row() for c in self.cells)
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Input generation and case dispatch
# ---------------------------------------------------------------------------


def draw_inputs(case: str, dim: int, ensemble: str, rng: np.random.Generator) -> dict:
    """Draw the matrices one trial of `case` consumes, from one generator."""
    needs = ineq.CASES[case].needs
    if needs in ("pair", "pair+func"):
        return {
            "a": mc.random_ensemble(ensemble, dim, rng),
            "b": mc.random_ensemble(ensemble, dim, rng),
        }
    if needs == "blocks":
        whole = mc.random_ensemble(ensemble, 2 * dim, rng)
        b, c, d = mc.split_blocks(whole, dim)
        return {"b": b, "c": c, "d": d}
    if needs == "cd":
        c = GeneralMatrix(mc.random_complex_gaussian(rng, dim, dim))
        d = mc.random_ensemble(ensemble, dim, rng)
        return {"c": c, "d": d}
    raise ValueError(f"unhandled input kind {needs!r}")


def evaluate_case(
    case: str,
    inputs: dict,
    *,
    q: float | None = None,
    func: fc.ScalarFunction | None = None,
    tol_rel: float = DEFAULT_TOL_REL,
    seed: int = -1,
    ensemble: str = "direct",
) -> TrialRecord:
    """Evaluate one catalog case on explicit inputs."""
    meta = {"tol_rel": tol_rel, "seed": seed, "ensemble": ensemble}
    if case == "MCCARTHY":
        return ineq.mccarthy_gap(inputs["a"], inputs["b"], q, **meta)
    if case == "GOLDEN_THOMPSON":
        return ineq.golden_thompson_gap(inputs["a"], inputs["b"], q, **meta)
    if case == "MAIN_TRACE":
        return ineq.main_trace_ineq(func, inputs["a"], inputs["b"], **meta)
    if case == "COR_ABQ":
        return ineq.cor_abq_gap(inputs["a"], inputs["b"], q, **meta)
    if case == "COR_PMEAN":
        return ineq.cor_pmean_gap(inputs["a"], inputs["b"], q, **meta)
    if case == "COR_FALTQ":
        return ineq.cor_faltq_gap(inputs["a"], inputs["b"], q, **meta)
    if case == "ALT":
        return ineq.alt_gap(inputs["a"], inputs["b"], q, **meta)
    if case == "PROP_Q4":
        residual, rec = ineq.prop_q4_check(inputs["a"], inputs["b"], **meta)
        scale = max(abs(rec.lhs), abs(rec.rhs), 1.0)
        if residual > 1e-9 * scale:
            raise DomainError(
                f"q=4 expansion identity failed: residual {residual:.3e} vs scale {scale:.3e}"
            )
        return rec
    if case == "COR_ABQ3":
        return ineq.cor_abq3_gap(inputs["c"], inputs["d"], q, **meta)
    if case == "NORM_COMPRESSION":
        return ineq.norm_compression_gap(inputs["b"], inputs["c"], inputs["d"], q, **meta)
    if case == "TRACE_SUBADD":
        return ineq.trace_subadd_gap(func, inputs["a"], inputs["b"], **meta)
    raise ValueError(f"unknown case {case!r}")


def _skipped(case, q, dim, seed, ensemble, reason) -> TrialRecord:
    return TrialRecord(
        case=case, q=q, dim=dim, seed=seed, ensemble=ensemble,
        lhs=0.0, rhs=0.0, gap=0.0, tol=0.0, verdict="SKIPPED", reason=reason,
    )


def run_cell(plan: SweepPlan, cell_index: int, q: float | None, dim: int) -> list[TrialRecord]:
    """All trial records of one cell; trial j uses seed
    base_seed + cell_index * 10**6 + j."""
    records = []
    for j in range(plan.trials_per_cell):
        seed = plan.base_seed + cell_index * CELL_SEED_STRIDE + j
        rng = np.random.default_rng(seed)
        try:
            inputs = draw_inputs(plan.case, dim, plan.ensemble, rng)
            rec = evaluate_case(
                plan.case, inputs, q=q, func=plan.func,
                tol_rel=plan.tol_rel, seed=seed, ensemble=plan.ensemble,
            )
        except DomainError as exc:
            rec = _skipped(plan.case, q, dim, seed, plan.ensemble, str(exc))
        records.append(rec)
    return records


def sweep_records(plan: SweepPlan) -> list[TrialRecord]:
    """Every record of the sweep, in deterministic cell-major order."""
    out: list[TrialRecord] = []
    for i, (q, dim) in enumerate(plan.cells()):
        out.extend(run_cell(plan, i, q, dim))
    return out


def run_sweep(plan: SweepPlan) -> SweepSummary:
    """Execute the plan cell by cell; domain rejections become SKIPPED
    records, never crashes."""
    cells = []
    for i, (q, dim) in enumerate(plan.cells()):
        cells.append(_summarize_cell(plan, q, dim, run_cell(plan, i, q, dim)))
    return SweepSummary(plan=plan, cells=tuple(cells))


def _summarize_cell(plan: SweepPlan, q, dim, records) -> CellSummary:
    evaluated = [r for r in records if r.verdict != "SKIPPED"]
    violations = sum(1 for r in evaluated if r.verdict == "FAIL")
    conjecture = sum(1 for r in evaluated if r.verdict == "CONJECTURE_OBS")
    worst = min(evaluated, key=lambda r: r.gap) if evaluated else None
    return CellSummary(
        case=plan.case,
        q=q,
        dim=dim,
        ensemble=plan.ensemble,
        trials=len(records),
        violations=violations,
        skipped=len(records) - len(evaluated),
        conjecture=conjecture,
        min_gap=worst.gap if worst is not None else None,
        max_gap=max(r.gap for r in evaluated) if evaluated else None,
        worst_seed=worst.seed if worst is not None else None,
        worst=worst,
    )


# ---------------------------------------------------------------------------
# Explicit counterexample reproduction
# ---------------------------------------------------------------------------

COUNTEREXAMPLE_A = HermitianMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
COUNTEREXAMPLE_B = HermitianMatrix(0.5 * np.array([[1.0, 1.0], [1.0, 1.0]]))


def repro_closed_forms(q: float) -> tuple[float, float]:
    """Closed forms for the explicit 2x2 example:
    lhs = (1 + sqrt(2)/2)^q + (1 - sqrt(2)/2)^q - 2, rhs = (2^q - 2)/2."""
    s = math.sqrt(2.0) / 2.0
    return (1.0 + s) ** q + (1.0 - s) ** q - 2.0, (2.0**q - 2.0) / 2.0


def repro_counterexample(q: float, tol_rel: float = DEFAULT_TOL_REL) -> TrialRecord:
    """Evaluate COR_ABQ on the explicit pair A = diag(1, 0),
    B = [[1,1],[1,1]]/2; for q > 3 the stated sense fails (FAIL verdict)."""
    return ineq.cor_abq_gap(
        COUNTEREXAMPLE_A, COUNTEREXAMPLE_B, q,
        tol_rel=tol_rel, seed=0, ensemble="explicit_pair",
    )


# ---------------------------------------------------------------------------
# Counterexample search
# ---------------------------------------------------------------------------


def _params_to_inputs(case: str, params: np.ndarray, dim: int) -> dict:
    """Unpack a flat real vector into the case's input matrices, PSD factors
    kept PSD by the Gram construction."""
    needs = ineq.CASES[case].needs

    def cmat(vec: np.ndarray, rows: int, cols: int) -> np.ndarray:
        n = rows * cols
        return vec[:n].reshape(rows, cols) + 1j * vec[n : 2 * n].reshape(rows, cols)

    if needs in ("pair", "pair+func"):
        n = 2 * dim * dim
        ga = cmat(params[:n], dim, dim)
        gb = cmat(params[n:], dim, dim)
        return {"a": HermitianMatrix(ga @ ga.conj().T), "b": HermitianMatrix(gb @ gb.conj().T)}
    if needs == "blocks":
        g = cmat(params, 2 * dim, 2 * dim)
        whole = HermitianMatrix(g @ g.conj().T)
        b, c, d = mc.split_blocks(whole, dim)
        return {"b": b, "c": c, "d": d}
    if needs == "cd":
        n = 2 * dim * dim
        c = cmat(params[:n], dim, dim)
        gd = cmat(params[n:], dim, dim)
        return {"c": GeneralMatrix(c), "d": HermitianMatrix(gd @ gd.conj().T)}
    raise ValueError(f"unhandled input kind {needs!r}")


def _param_count(case: str, dim: int) -> int:
    needs = ineq.CASES[case].needs
    if needs == "blocks":
        return 2 * (2 * dim) * (2 * dim)
    return 4 * dim * dim


def search_counterexample(
    case: str,
    q: float | None,
    dim: int,
    budget: int,
    seed: int,
    func: fc.ScalarFunction | None = None,
    tol_rel: float = DEFAULT_TOL_REL,
) -> TrialRecord:
    """Minimize the oriented gap over `budget` random restarts, each refined
    by coordinate-wise Gaussian perturbations with step halving on
    non-improvement.  Returns the most negative-gap record found; the record's
    `detail` carries the input matrices so the gap can be re-evaluated."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if case not in ineq.CASES:
        raise ValueError(f"unknown case {case!r}")
    rng = np.random.default_rng(seed)
    nparams = _param_count(case, dim)

    def gap_of(params: np.ndarray) -> float:
        try:
            inputs = _params_to_inputs(case, params, dim)
            rec = evaluate_case(case, inputs, q=q, func=func, tol_rel=tol_rel)
        except DomainError:
            return math.inf
        return rec.gap

    best_params = None
    best_gap = math.inf
    for _ in range(budget):
        params = rng.standard_normal(nparams)
        gap = gap_of(params)
        step = SEARCH_INITIAL_STEP
        for it in range(SEARCH_REFINE_STEPS):
            idx = it % nparams
            candidate = params.copy()
            candidate[idx] += step * rng.standard_normal()
            cand_gap = gap_of(candidate)
            if cand_gap < gap:
                params, gap = candidate, cand_gap
            else:
                step *= 0.5
        if gap < best_gap:
            best_gap, best_params = gap, params

    if best_params is None or not math.isfinite(best_gap):
        raise DomainError(f"search produced no evaluable candidate for {case} (q={q}, dim={dim})")

    inputs = _params_to_inputs(case, best_params, dim)
    rec = evaluate_case(
        case, inputs, q=q, func=func, tol_rel=tol_rel, seed=seed, ensemble="search"
    )
    return replace(rec, detail=inputs)


# ---------------------------------------------------------------------------
# Conjecture probes
# ---------------------------------------------------------------------------

CONJECTURE_REGIONS = {
    "FALTQ_HIGH": ("COR_FALTQ", lambda q: q > 3),
    "FALTQ_NEG": ("COR_FALTQ", lambda q: -2 < q < 0),
    "NORMCOMP_HIGH": ("NORM_COMPRESSION", lambda q: q > 3),
}


def probe_conjecture(region: str, plan: SweepPlan) -> SweepSummary:
    """Sweep restricted to one of the open parameter regions.  Every emitted
    verdict is CONJECTURE_OBS (or SKIPPED); the summary reports the minimum
    observed gap and the seed of the minimizing input."""
    if region not in CONJECTURE_REGIONS:
        raise ValueError(f"unknown region {region!r}; choose from {sorted(CONJECTURE_REGIONS)}")
    case, member = CONJECTURE_REGIONS[region]
    if plan.case != case:
        raise ValueError(f"region {region} probes case {case}, plan has {plan.case}")
    outside = [q for q in plan.q_grid if q is None or not member(q)]
    if outside:
        raise ValueError(f"q values {outside} fall outside region {region}")
    summary = run_sweep(plan)
    if any(c.violations for c in summary.cells):
        raise AssertionError("conjecture probes must not emit FAIL verdicts")
    return summary
