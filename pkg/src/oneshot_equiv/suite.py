"""Seeded verification suites built from the checks in :mod:`.lhl`.

A suite is a list of jobs; each job owns a seed derived from the master seed,
the check name and the job's position, runs one or more checks and returns
their reports.  Results are collected in job order, so the output does not
depend on how many worker processes ran them.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import lhl
from .algorithms import AlgorithmInstance, InstanceConfig, random_instance
from .gf2 import HashFamily, LinearHash, family_all_linear, family_toeplitz
from .quantum import PureState, RegisterLayout, haar_pure

_OUTPUT_FIELDS = ("out", "csv", "jobs")
CHECKS = ("theorem1", "uncertainty", "lhl", "coding", "transfer", "collision", "distances", "entropy", "families", "qkd")


@dataclass
class RunConfig:
    """Fully resolved settings of a verification run.

    ``n = None`` cycles through ``sizes``; ``m = None`` uses ``1`` for hash
    families and a random ``m`` for single-hash instances.  ``tol`` overrides
    the tolerance of every floating-point report.
    """

    seed: int = 42
    n: int | None = None
    m: int | None = None
    family: str = "toeplitz"
    delta_family: str | None = None
    checks: list[str] = field(default_factory=lambda: ["all"])
    count: int = 2
    sizes: list[int] = field(default_factory=lambda: [1, 2])
    family_sizes: list[int] = field(default_factory=lambda: [2, 3])
    cert_max_n: int = 4
    out: str | None = None
    csv: str | None = None
    jobs: int = 1
    tol: float | None = None

    def __post_init__(self):
        if self.family not in ("toeplitz", "all-linear"):
            raise ValueError(f"unknown family kind {self.family!r}")
        if self.n is not None and not 1 <= self.n <= 3:
            raise ValueError("n must lie in 1..3")
        if self.count < 1:
            raise ValueError("count must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        bad = [c for c in self.checks if c != "all" and c not in CHECKS]
        if bad:
            raise ValueError(f"unknown check(s): {', '.join(bad)}")
        if set(self.resolved_checks()) & _FAMILY_CHECKS:
            for n in [self.n] if self.n is not None else self.family_sizes:
                m = self.m if self.m is not None else 1
                if not 1 <= m < n:
                    raise ValueError(f"hash-family checks need 1 <= m < n (n = {n}, m = {m})")
        if self.m is not None and self.n is not None and not 1 <= self.m <= self.n:
            raise ValueError("m must satisfy 1 <= m <= n")

    def resolved_checks(self) -> list[str]:
        return list(CHECKS) if "all" in self.checks else list(self.checks)

    def to_json(self) -> dict:
        # output locations and worker count do not change any result, so reports
        # written to different paths or with different --jobs stay byte-identical
        return {k: v for k, v in asdict(self).items() if k not in _OUTPUT_FIELDS}


def derive_seed(master: int, check: str, index: int) -> int:
    """Seed of job ``index`` of ``check``, independent of which checks run."""
    ss = np.random.SeedSequence([master % 2**64, zlib.crc32(check.encode()), index])
    return int(ss.generate_state(1, np.uint32)[0])


def make_family(kind: str, n: int, m: int) -> HashFamily:
    return family_toeplitz(n, m) if kind == "toeplitz" else family_all_linear(n, m)


def _load_family(path: str) -> HashFamily:
    with open(path) as fh:
        return HashFamily.from_json(json.load(fh))


# ------------------------------------------------------------------ jobs


@dataclass(frozen=True)
class Job:
    check: str
    index: int
    seed: int
    n: int
    cfg: RunConfig


def _inst(job: Job, m: int | None = None, trace: float = 1.0) -> AlgorithmInstance:
    return random_instance(job.seed, InstanceConfig(job.n, m if m is not None else job.cfg.m, trace=trace))


def _family_m(job: Job) -> int:
    m = job.cfg.m if job.cfg.m is not None else 1
    if not 1 <= m < job.n:
        raise ValueError(f"family checks need 1 <= m < n, got m = {m}, n = {job.n}")
    return m


def _job_family(job: Job) -> HashFamily:
    return make_family(job.cfg.family, job.n, _family_m(job))


def _run_index_equality(job: Job) -> list[lhl.VerificationReport]:
    # every other instance is sub-normalized
    trace = 1.0 if job.index % 2 == 0 else 0.75
    return [lhl.check_index_equality(_inst(job, trace=trace))]


def _run_uncertainty(job: Job) -> list[lhl.VerificationReport]:
    reps = [lhl.check_uncertainty(_inst(job))]
    rng = np.random.default_rng(job.seed)
    dims = [2**job.n, 4, 2]
    psi = PureState(RegisterLayout.of(("A", dims[0]), ("B", dims[1]), ("E", dims[2])), haar_pure(dims, rng))
    reps.append(lhl.check_uncertainty_general(psi, job.n, job.seed))
    return reps


def _run_lhl(job: Job) -> list[lhl.VerificationReport]:
    inst = _inst(job, m=_family_m(job))
    fam = _job_family(job)
    reps = [lhl.check_lhl_universal2(inst, fam), lhl.check_lhl_almost_universal2(inst, fam), lhl.check_lhl_dual_universal2(inst, fam)]
    if job.cfg.delta_family:
        dfam = _load_family(job.cfg.delta_family)
        if dfam.n == job.n:
            inst_d = _inst(job, m=dfam.m)
            reps.append(lhl.check_lhl_almost_universal2(inst_d, dfam))
            if dfam.m < dfam.n:
                reps.append(lhl.check_lhl_dual_universal2(inst_d, dfam))
    elif job.n == 2 and job.index == 0:
        dfam = HashFamily.uniform([LinearHash.from_rows(["11"])], "single[11]")
        reps.append(lhl.check_lhl_almost_universal2(inst, dfam))
    return reps


def _run_coding(job: Job) -> list[lhl.VerificationReport]:
    inst = _inst(job, m=_family_m(job))
    fam = _job_family(job)
    reps = [lhl.check_coding_theorems(inst, fam, w) for w in ("Lemma6", "Lemma8", "Lemma10")]
    return reps + lhl.check_four_root(inst, fam)


def _run_transfer(job: Job) -> list[lhl.VerificationReport]:
    return lhl.check_theorem2_transfer(_inst(job, m=_family_m(job)), _job_family(job), "universal2")


def _run_collision(job: Job) -> list[lhl.VerificationReport]:
    inst = _inst(job, m=_family_m(job))
    return lhl.check_theorem4_pipeline(inst, _job_family(job)) + lhl.check_collision_chain(inst)


def _run_distances(job: Job) -> list[lhl.VerificationReport]:
    inst = _inst(job)
    ident = LinearHash.from_rows([format(1 << (job.n - 1 - i), f"0{job.n}b") for i in range(job.n)])
    return lhl.check_distance_bounds(inst) + [lhl.check_guessing_from_qpa(inst.with_hash(ident))]


def _run_entropy(job: Job) -> list[lhl.VerificationReport]:
    reps = lhl.check_entropy_engine(_inst(job))
    if job.index == 0:
        reps = lhl.check_fixed_oracles() + reps
    return reps


def _run_families(job: Job) -> list[lhl.VerificationReport]:
    reps = []
    for n in range(2, job.cfg.cert_max_n + 1):
        for m in range(1, n):
            for kind in ("all-linear", "toeplitz"):
                fam = make_family(kind, n, m)
                reps.append(lhl.check_universal_exact(fam))
                reps += lhl.check_family_certification(fam)
    if job.cfg.delta_family:
        reps += lhl.check_family_certification(_load_family(job.cfg.delta_family))
    return reps


def _run_qkd(job: Job) -> list[lhl.VerificationReport]:
    inst = _inst(job, m=_family_m(job))
    h = lhl.hmin_ze(inst).value
    # threshold: the measured min-entropy rounded down to 1e-6
    h_th = max(0.0, math.floor(h * 1e6) / 1e6)
    return lhl.qkd_conversion_demo(inst, _job_family(job), h_th)


RUNNERS: dict[str, Callable[[Job], list[lhl.VerificationReport]]] = {
    "theorem1": _run_index_equality,
    "uncertainty": _run_uncertainty,
    "lhl": _run_lhl,
    "coding": _run_coding,
    "transfer": _run_transfer,
    "collision": _run_collision,
    "distances": _run_distances,
    "entropy": _run_entropy,
    "families": _run_families,
    "qkd": _run_qkd,
}

_FAMILY_CHECKS = {"lhl", "coding", "transfer", "collision", "qkd"}


def plan(cfg: RunConfig) -> list[Job]:
    """Job list for ``cfg`` in a fixed order."""
    jobs = []
    for check in cfg.resolved_checks():
        if check == "families":
            jobs.append(Job(check, 0, 0, 0, cfg))
            continue
        if cfg.n is not None:
            sizes = [cfg.n]
        else:
            sizes = cfg.family_sizes if check in _FAMILY_CHECKS else cfg.sizes
        for i in range(cfg.count):
            jobs.append(Job(check, i, derive_seed(cfg.seed, check, i), sizes[i % len(sizes)], cfg))
    return jobs


def _run_job(job: Job) -> list[lhl.VerificationReport]:
    reps = RUNNERS[job.check](job)
    for r in reps:
        r.instance = {"suite": job.check, "job": job.index, **r.instance}
        if job.cfg.tol is not None and r.kind in ("inequality", "equality"):
            r.tol = job.cfg.tol
    return reps


def run(cfg: RunConfig) -> list[lhl.VerificationReport]:
    """Run every job of ``cfg`` and return the reports in job order."""
    jobs = plan(cfg)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    return [r for rs in results for r in rs]


# ------------------------------------------------------------------ output


def summarize(reports: list[lhl.VerificationReport]) -> list[dict]:
    """One row per check name: count, minimum slack, maximum spread, pass flag."""
    rows: dict[str, dict] = {}
    for r in reports:
        row = rows.setdefault(r.check, {"check": r.check, "instances": 0, "min_slack": None, "max_spread": None, "passed": True})
        row["instances"] += 1
        row["passed"] = row["passed"] and r.passed
        if r.kind in ("equality", "exact-equality"):
            spread = abs(float(r.lhs) - float(r.rhs))
            row["max_spread"] = spread if row["max_spread"] is None else max(row["max_spread"], spread)
        else:
            row["min_slack"] = r.slack if row["min_slack"] is None else min(row["min_slack"], r.slack)
    return list(rows.values())


def report_document(cfg: RunConfig, reports: list[lhl.VerificationReport]) -> dict:
    return {
        "config": cfg.to_json(),
        "passed": all(r.passed for r in reports),
        "summary": summarize(reports),
        "reports": [r.to_json() for r in reports],
    }


def dumps_report(doc: dict) -> str:
    # repr-based float output is the shortest exact round trip, so equal runs give equal bytes
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def summary_csv(reports: list[lhl.VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, ["check", "instances", "min_slack", "max_spread", "passed"], lineterminator="\n")
    w.writeheader()
    for row in summarize(reports):
        w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
