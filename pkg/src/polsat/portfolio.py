"""Race solvers on one formula; first definitive verdict wins.

One worker per configured solver.  The first Sat/Unsat answer decides the
result and every other worker is cancelled (internal solvers via a flag,
external processes via terminate-then-kill).  ``run_all`` instead lets every
solver finish and :func:`arbitrate` checks the answers for consistency,
which is what makes the portfolio usable as a solver-testing platform.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass, replace
from typing import Callable

from .engine import Budget, Verdict, run_strategy
from .formulas import Formula
from .lasso import LassoWord, evaluate

__all__ = [
    "SolverSpec",
    "RunRecord",
    "PortfolioResult",
    "ConsistencyReport",
    "internal_solvers",
    "race",
    "run_all",
    "arbitrate",
]

log = logging.getLogger(__name__)

#: Extra seconds granted past the timeout for workers to report and for
#: external kill escalation to finish.
GRACE_SECONDS = 1.0

Runner = Callable[[Formula, float, threading.Event], "RunRecord"]


@dataclass(frozen=True)
class SolverSpec:
    """A runnable solver: a name, a worker callable, and capabilities."""

    name: str
    kind: str  # "internal" | "external"
    run: Runner
    supports_evidence: bool = True
    detail: str = ""


@dataclass(frozen=True)
class RunRecord:
    """One solver's answer on one formula."""

    solver: str
    verdict: Verdict
    elapsed: float

    @property
    def evidence(self) -> LassoWord | None:
        return self.verdict.evidence


@dataclass(frozen=True)
class PortfolioResult:
    """Outcome of a race: the verdict, who produced it, and when."""

    verdict: Verdict
    winner: str
    elapsed: float
    records: tuple[RunRecord, ...] = ()


@dataclass(frozen=True)
class ConsistencyReport:
    """Cross-solver agreement over a set of run records.

    Unknown verdicts never create conflicts; ``verdict_groups`` maps each
    definitive verdict word to the solvers that produced it, and
    ``invalid_evidence`` names solvers whose sat evidence failed
    re-evaluation.
    """

    consistent: bool
    verdict_groups: dict[str, tuple[str, ...]]
    invalid_evidence: tuple[str, ...] = ()


def internal_solvers() -> list[SolverSpec]:
    """The built-in solver set: tableau, lasso, shortcut."""
    return [
        SolverSpec("tableau", "internal", _internal_runner("tableau"), True, "tableau"),
        SolverSpec("lasso", "internal", _internal_runner("lasso"), True, "lasso"),
        SolverSpec(
            "shortcut", "internal", _internal_runner("shortcut"), True, "shortcut"
        ),
    ]


def _internal_runner(strategy: str) -> Runner:
    def run(formula: Formula, timeout: float, cancel: threading.Event) -> RunRecord:
        start = time.monotonic()
        budget = Budget(max_nodes=None, deadline=start + timeout, cancel=cancel)
        try:
            verdict = run_strategy(strategy, formula, budget)
        except Exception as exc:  # defensive: a solver bug must not kill the race
            log.exception("internal solver %s failed", strategy)
            verdict = Verdict.error(f"{type(exc).__name__}: {exc}")
        elapsed = time.monotonic() - start
        return _normalize_record(strategy, verdict, elapsed, timeout)

    return run


def _normalize_record(
    name: str, verdict: Verdict, elapsed: float, timeout: float
) -> RunRecord:
    # Timed-out runs are accounted at exactly the timeout value.
    if verdict.is_timeout:
        elapsed = timeout
    else:
        elapsed = min(elapsed, timeout + GRACE_SECONDS)
    return RunRecord(name, verdict, elapsed)


def _validated(record: RunRecord, formula: Formula) -> RunRecord:
    """Drop sat evidence that does not actually satisfy the formula."""
    verdict = record.verdict
    if verdict.is_sat and verdict.evidence is not None:
        if not evaluate(verdict.evidence, formula):
            log.warning("solver %s returned invalid evidence; dropped", record.solver)
            return replace(record, verdict=Verdict.sat(None))
    return record


def _check_solvers(solvers: list[SolverSpec]) -> None:
    if not solvers:
        raise ValueError("no solvers configured")
    names = [s.name for s in solvers]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate solver names: {names}")


def race(
    formula: Formula,
    solvers: list[SolverSpec],
    timeout: float,
    want_evidence: bool = False,
) -> PortfolioResult:
    """Run all solvers concurrently; the first definitive verdict wins.

    On a win every other worker is cancelled.  If ``want_evidence`` is set
    and the winner has no evidence for a sat verdict, evidence-capable
    solvers keep running until one produces a (validated) witness or the
    timeout expires; the witness producer then becomes the winner.  If no
    solver answers, the result is Unknown(timeout) with winner ``"none"``.
    """
    _check_solvers(solvers)
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    start = time.monotonic()
    results: "queue.Queue[tuple[int, RunRecord]]" = queue.Queue()
    cancels = [threading.Event() for _ in solvers]

    def worker(i: int, spec: SolverSpec) -> None:
        try:
            record = spec.run(formula, timeout, cancels[i])
        except Exception as exc:  # spec.run must not raise, but stay safe
            record = RunRecord(spec.name, Verdict.error(str(exc)), timeout)
        results.put((i, record))

    for i, spec in enumerate(solvers):
        threading.Thread(
            target=worker, args=(i, spec), daemon=True, name=f"polsat-{spec.name}"
        ).start()

    deadline = start + timeout
    pending = set(range(len(solvers)))
    winner: RunRecord | None = None
    hunting_evidence = False

    def cancel_others(keep_evidence_capable: bool) -> None:
        for j in pending:
            if keep_evidence_capable and solvers[j].supports_evidence:
                continue
            cancels[j].set()

    while pending:
        remaining = (deadline + GRACE_SECONDS + 1.0) - time.monotonic()
        if remaining <= 0:
            break
        try:
            i, record = results.get(timeout=remaining)
        except queue.Empty:
            break
        arrived = [(i, record)]
        while True:  # drain what arrived together, lowest worker index wins ties
            try:
                arrived.append(results.get_nowait())
            except queue.Empty:
                break
        arrived.sort(key=lambda item: item[0])
        for i, record in arrived:
            pending.discard(i)
            record = _validated(record, formula)
            if not record.verdict.is_definitive:
                continue
            if winner is None:
                winner = record
                if (
                    want_evidence
                    and record.verdict.is_sat
                    and record.verdict.evidence is None
                    and any(solvers[j].supports_evidence for j in pending)
                ):
                    hunting_evidence = True
                    cancel_others(keep_evidence_capable=True)
                else:
                    cancel_others(keep_evidence_capable=False)
                    pending.clear()
                    break
            elif (
                hunting_evidence
                and record.verdict.is_sat
                and record.verdict.evidence is not None
            ):
                winner = record
                cancel_others(keep_evidence_capable=False)
                pending.clear()
                break

    for event in cancels:
        event.set()

    if winner is not None:
        return PortfolioResult(winner.verdict, winner.solver, winner.elapsed)
    return PortfolioResult(Verdict.timeout(), "none", timeout)


def run_all(
    formula: Formula, solvers: list[SolverSpec], timeout: float
) -> list[RunRecord]:
    """Run every solver to completion or its own timeout; no cancellation.

    Records come back fastest-first.  A solver failure becomes an
    Unknown(solver-error) record rather than an exception.
    """
    _check_solvers(solvers)
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    records: list[RunRecord | None] = [None] * len(solvers)
    never = threading.Event()

    def worker(i: int, spec: SolverSpec) -> None:
        try:
            records[i] = spec.run(formula, timeout, never)
        except Exception as exc:
            records[i] = RunRecord(spec.name, Verdict.error(str(exc)), timeout)

    threads = [
        threading.Thread(target=worker, args=(i, spec), daemon=True)
        for i, spec in enumerate(solvers)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout + 2 * GRACE_SECONDS + 1.0)
    out = []
    for i, spec in enumerate(solvers):
        record = records[i]
        if record is None:  # worker stuck past its own timeout handling
            record = RunRecord(spec.name, Verdict.error("worker did not report"), timeout)
        out.append(record)
    out.sort(key=lambda r: r.elapsed)
    return out


def arbitrate(
    records: list[RunRecord], formula: Formula | None = None
) -> ConsistencyReport:
    """Check run records for verdict consistency.

    Sat evidence is re-verified against ``formula`` when one is supplied;
    invalid evidence is reported per solver but does not by itself make the
    verdicts inconsistent.
    """
    groups: dict[str, list[str]] = {}
    invalid: list[str] = []
    for record in records:
        verdict = record.verdict
        if verdict.is_definitive:
            groups.setdefault(verdict.kind, []).append(record.solver)
        if (
            formula is not None
            and verdict.is_sat
            and verdict.evidence is not None
            and not evaluate(verdict.evidence, formula)
        ):
            invalid.append(record.solver)
    consistent = len(groups) <= 1
    return ConsistencyReport(
        consistent=consistent,
        verdict_groups={kind: tuple(names) for kind, names in groups.items()},
        invalid_evidence=tuple(invalid),
    )
