"""Deterministic experiment harness: recovery sweeps and certification.

A phase-transition run plants a random block-sparse signal per (sparsity,
trial) cell, recovers it with each configured algorithm, and records exact
success.  Every trial derives its own generator state from (seed, s, trial),
so results do not depend on execution order and identical configurations
produce byte-identical output files.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import io as hio
from .blocks import BlockDictionary, BlockVector, h1_norm
from .coherence import coherence_report
from .models import (MultiCosetSpec, complex_standard_normal, identity_dft_pair,
                     multicoset_matrix, random_block_dictionary)
from .recovery import BpParams, RecoveryResult, hbp_solve, homp, hp0_exhaustive

ALGORITHMS = ("bp", "omp", "p0")
# Exact-recovery tolerances entering the success verdict.
SUCCESS_TOL = {"p0": 1e-6, "omp": 1e-6, "bp": 1e-5}

# Columns written to CSV, in order.  Wall time stays in memory only: files
# must be byte-identical across reruns of the same configuration.
CSV_FIELDS = ("s", "trial", "algorithm", "success", "rel_error",
              "support_match", "iterations", "residual_norm")


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one (sparsity, trial, algorithm) cell."""

    s: int
    trial: int
    algorithm: str
    success: bool
    rel_error: float
    support_match: bool
    iterations: int
    residual_norm: float
    wall_time_s: float = 0.0

    def csv_row(self) -> list[str]:
        return [hio.csv_cell(getattr(self, name)) for name in CSV_FIELDS]


def parse_trial_row(row: list[str]) -> TrialRecord:
    """Rebuild a TrialRecord from its CSV cells (wall time is not stored)."""
    if len(row) != len(CSV_FIELDS):
        raise ValueError(f"expected {len(CSV_FIELDS)} cells, got {len(row)}")
    return TrialRecord(
        s=int(row[0]), trial=int(row[1]), algorithm=row[2],
        success=row[3] == "true", rel_error=float(row[4]),
        support_match=row[5] == "true", iterations=int(row[6]),
        residual_norm=float(row[7]))


@dataclass
class ExperimentConfig:
    """Declarative description of a recovery sweep.

    ``dictionary`` names either a file ({"kind": "file", "path": ...}) or a
    constructor ({"kind": "identity_dft" | "multicoset" | "random", ...}).
    ``tolerances`` may override solver defaults: keys bp_rho, bp_tol_primal,
    bp_tol_dual, bp_max_iter, omp_tol_res, p0_tol.
    """

    dictionary: dict
    algorithms: tuple[str, ...] = ALGORITHMS
    s_min: int = 1
    s_max: int = 1
    trials: int = 1
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self):
        self.algorithms = tuple(sorted(set(self.algorithms)))
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms: {bad}")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        if self.trials < 1:
            raise ValueError("need at least one trial per sparsity")
        if not 1 <= self.s_min <= self.s_max:
            raise ValueError("need 1 <= s_min <= s_max")

    @classmethod
    def from_mapping(cls, doc: dict) -> "ExperimentConfig":
        known = {"dictionary", "algorithms", "s_min", "s_max", "trials",
                 "seed", "tolerances", "out"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "dictionary" not in doc:
            raise ValueError("config needs a dictionary source")
        kwargs = dict(doc)
        if "algorithms" in kwargs:
            kwargs["algorithms"] = tuple(kwargs["algorithms"])
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return {
            "dictionary": dict(self.dictionary),
            "algorithms": list(self.algorithms),
            "s_min": self.s_min,
            "s_max": self.s_max,
            "trials": self.trials,
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "out": self.out,
        }


def build_dictionary(source: dict) -> BlockDictionary:
    """Materialize a dictionary source description."""
    if not isinstance(source, dict) or "kind" not in source:
        raise ValueError('dictionary source needs a "kind"')
    kind = source["kind"]
    if kind == "file":
        return hio.load_block_dictionary(source["path"])
    if kind == "identity_dft":
        return identity_dft_pair(int(source["n"]))
    if kind == "multicoset":
        rows = source.get("rows")
        if rows is None:
            rows = list(range(1, int(source["m"]) + 1))
        spec = MultiCosetSpec(int(source["n"]), tuple(int(r) for r in rows),
                              float(source.get("period", 1.0)))
        return multicoset_matrix(spec)
    if kind == "random":
        return random_block_dictionary(
            int(source["rows"]), tuple(int(d) for d in source["block_sizes"]),
            int(source["seed"]), source.get("normalize", "columns"))
    raise ValueError(f"unknown dictionary kind: {kind!r}")


def plant_signal(D: BlockDictionary, s: int, master_seed: int,
                 trial: int) -> tuple[BlockVector, tuple[int, ...]]:
    """Draw an s-block-sparse signal for one trial cell.

    The generator state depends only on (master_seed, s, trial), never on
    scheduling, so sweeps are reproducible under any execution order.
    """
    rng = np.random.default_rng([master_seed, s, trial])
    n = D.n_blocks
    support = tuple(sorted(int(i) for i in rng.choice(n, size=s, replace=False)))
    entries = np.zeros(D.structure.dim, dtype=np.complex128)
    for i in support:
        sl = D.structure.block_slice(i)
        entries[sl] = complex_standard_normal(rng, sl.stop - sl.start)
    return BlockVector(entries, D.structure), support


def _run_algorithm(algo: str, D: BlockDictionary, y: np.ndarray, s: int,
                   tols: dict, h1_ref: float | None) -> RecoveryResult:
    if algo == "p0":
        return hp0_exhaustive(D, y, tol=tols.get("p0_tol", 1e-8),
                              cap=D.n_blocks, max_cardinality=s)
    if algo == "omp":
        return homp(D, y, tol_res=tols.get("omp_tol_res", 1e-10))
    if algo == "bp":
        params = BpParams(rho=tols.get("bp_rho", 1.0),
                          tol_primal=tols.get("bp_tol_primal", 1e-9),
                          tol_dual=tols.get("bp_tol_dual", 1e-9),
                          max_iter=int(tols.get("bp_max_iter", 100_000)))
        return hbp_solve(D, y, params, h1_reference=h1_ref)
    raise ValueError(f"unknown algorithm: {algo!r}")


def evaluate_trial(result: RecoveryResult, truth: BlockVector,
                   support: tuple[int, ...], algo: str) -> tuple[bool, float, bool]:
    rel_error = float(np.linalg.norm(result.solution.entries - truth.entries))
    rel_error /= max(float(np.linalg.norm(truth.entries)), 1e-300)
    support_match = result.support == support
    success = support_match and rel_error <= SUCCESS_TOL[algo]
    return success, rel_error, support_match


def run_phase_transition(config: ExperimentConfig) -> list[TrialRecord]:
    """Run the sweep; write CSV and a JSON sidecar when config.out is set."""
    D = build_dictionary(config.dictionary)
    n = D.n_blocks
    if config.s_max > n:
        raise ValueError(f"s_max {config.s_max} exceeds {n} blocks")
    records: list[TrialRecord] = []
    # p0 first so its objective can qualify the relaxation result as exact.
    order = [a for a in ("p0", "omp", "bp") if a in config.algorithms]

    for s in range(config.s_min, config.s_max + 1):
        for trial in range(config.trials):
            truth, support = plant_signal(D, s, config.seed, trial)
            y = D.matrix @ truth.entries
            h1_ref = None
            for algo in order:
                t0 = time.perf_counter()
                result = _run_algorithm(algo, D, y, s, config.tolerances, h1_ref)
                wall = time.perf_counter() - t0
                if algo == "p0":
                    h1_ref = h1_norm(result.solution)
                success, rel_error, support_match = evaluate_trial(
                    result, truth, support, algo)
                records.append(TrialRecord(
                    s=s, trial=trial, algorithm=algo, success=success,
                    rel_error=rel_error, support_match=support_match,
                    iterations=result.iterations,
                    residual_norm=result.residual_norm, wall_time_s=wall))
    records.sort(key=lambda r: (r.s, r.trial, r.algorithm))

    if config.out:
        write_outputs(config, D, records)
    return records


def write_outputs(config: ExperimentConfig, D: BlockDictionary,
                  records: list[TrialRecord]) -> tuple[str, str]:
    csv_path = config.out + ".csv"
    json_path = config.out + ".json"
    lines = [",".join(CSV_FIELDS)]
    lines += [",".join(r.csv_row()) for r in records]
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    report = coherence_report(D, compute_spark=D.n_blocks <= 20)
    sidecar = {
        "seed": config.seed,
        "config": config.to_mapping(),
        "coherence_report": report.to_mapping(),
    }
    hio.write_document(json_path, sidecar)
    return csv_path, json_path


def max_guaranteed_sparsity(threshold: float | None, n_blocks: int) -> int | str:
    """Largest s with s < threshold (strict); the full block count if vacuous."""
    if threshold is None:
        return "not-computed"
    if math.isinf(threshold):
        return n_blocks
    return max(0, int(math.ceil(threshold - 1e-12)) - 1)


def run_certify(D: BlockDictionary, compute_spark: bool = True,
                spark_cap: int = 20) -> dict:
    """Certification document: report, guaranteed sparsity levels, ordering.

    For uniform block sizes the composite-vs-subspace coherence comparison is
    included with a verdict: "equal" (orthonormal-block case), "improved"
    (strict inequality), "invalid" (composite bound vacuous), or "violated",
    which flags a numerical anomaly.
    """
    report = coherence_report(D, compute_spark=compute_spark, spark_cap=spark_cap)
    doc = report.to_mapping()
    spark_threshold = None
    if report.spark_computed:
        # A trivial kernel guarantees every sparsity level up to n.
        spark_threshold = math.inf if report.spark_trivial else report.spark / 2.0
    doc["max_guaranteed_s_spark"] = max_guaranteed_sparsity(spark_threshold,
                                                            report.n_blocks)
    doc["max_guaranteed_s_coherence"] = max_guaranteed_sparsity(
        report.threshold_coherence, report.n_blocks)
    bound_ok = report.spark_bound_ok()
    if bound_ok is not None:
        doc["spark_bound_ok"] = bound_ok
    if report.mu_block is not None:
        if report.mu_hat_invalid:
            verdict = "invalid"
        elif abs(report.mu_h - report.mu_hat) <= 1e-10:
            verdict = "equal"
        elif report.mu_h < report.mu_hat:
            verdict = "improved"
        else:
            verdict = "violated"
        doc["mu_comparison"] = verdict
    return doc
