"""External solver processes and the persisted solver registry.

An external solver is any executable that takes one formula as its single
argument and prints ``sat`` or ``unsat`` (case-insensitive) as the first
line of standard output, optionally followed by one evidence line in the
lasso text format.  Registered paths persist in a line-oriented registry
file (one absolute path per line) whose location can be overridden with the
``POLSAT_REGISTRY`` environment variable.
"""

from __future__ import annotations

import logging
import os
import re
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .engine import Verdict
from .formulas import DEFAULT_DIALECT, Dialect, Formula, render
from .lasso import EvidenceError, parse_evidence
from .portfolio import GRACE_SECONDS, RunRecord, SolverSpec

__all__ = [
    "ExternalSolverSpec",
    "Registry",
    "RegistrationError",
    "default_registry_path",
    "register",
    "invoke",
    "as_solver_spec",
]

log = logging.getLogger(__name__)

ENV_REGISTRY = "POLSAT_REGISTRY"

_VERDICT_RE = re.compile(r"(sat|unsat)", re.IGNORECASE)


class RegistrationError(ValueError):
    """The path cannot be registered as a solver."""


@dataclass(frozen=True)
class ExternalSolverSpec:
    """A registered external solver executable."""

    path: str
    dialect: Dialect = DEFAULT_DIALECT
    timeout_grace: float = GRACE_SECONDS

    @property
    def name(self) -> str:
        return Path(self.path).name


def default_registry_path() -> Path:
    env = os.environ.get(ENV_REGISTRY)
    if env:
        return Path(env)
    config_home = os.environ.get("XDG_CONFIG_HOME") or str(Path.home() / ".config")
    return Path(config_home) / "polsat" / "solvers"


@dataclass
class Registry:
    """Ordered list of external solver paths, stored one per line."""

    specs: list[ExternalSolverSpec] = field(default_factory=list)
    path: Path = field(default_factory=default_registry_path)

    @classmethod
    def load(cls, path: Path | None = None) -> "Registry":
        path = path or default_registry_path()
        specs: list[ExternalSolverSpec] = []
        seen: set[str] = set()
        if path.exists():
            for line in path.read_text().splitlines():
                line = line.strip()
                if not line or line in seen:
                    continue
                seen.add(line)
                specs.append(ExternalSolverSpec(line))
        return cls(specs, path)

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        text = "".join(spec.path + "\n" for spec in self.specs)
        self.path.write_text(text)

    def add(self, solver_path: str) -> bool:
        """Append a solver; returns False (no-op) when already present."""
        resolved = str(Path(solver_path).resolve())
        if any(spec.path == resolved for spec in self.specs):
            return False
        self.specs.append(ExternalSolverSpec(resolved))
        return True


def register(solver_path: str, registry_path: Path | None = None) -> Registry:
    """Validate and persist an external solver path.

    The path must exist and be executable.  Re-registering an already known
    path is an idempotent no-op (a warning is logged).
    """
    p = Path(solver_path)
    if not p.exists():
        raise RegistrationError(f"no such file: {solver_path}")
    if not os.access(p, os.X_OK) or p.is_dir():
        raise RegistrationError(f"not an executable file: {solver_path}")
    registry = Registry.load(registry_path)
    if registry.add(solver_path):
        registry.save()
    else:
        log.warning("%s is already registered", solver_path)
    return registry


def invoke(
    spec: ExternalSolverSpec,
    formula: Formula,
    timeout: float,
    cancel: threading.Event | None = None,
) -> RunRecord:
    """Run one external solver on one formula.

    The formula is rendered in the spec's dialect and passed as a single
    argument.  On timeout or cancellation the process is terminated, then
    killed after ``timeout_grace`` seconds if still alive.
    """
    text = render(formula, spec.dialect)
    start = time.monotonic()
    deadline = start + timeout
    try:
        proc = subprocess.Popen(
            [spec.path, text],
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
    except OSError as exc:
        return RunRecord(spec.name, Verdict.error(f"spawn failed: {exc}"), 0.0)

    output: str | None = None
    while output is None:
        try:
            output, _ = proc.communicate(timeout=0.02)
        except subprocess.TimeoutExpired:
            if cancel is not None and cancel.is_set():
                _kill(proc, spec.timeout_grace)
                return RunRecord(
                    spec.name, Verdict.cancelled(), time.monotonic() - start
                )
            if time.monotonic() >= deadline:
                _kill(proc, spec.timeout_grace)
                # Accounting rule: a timed-out run costs exactly the timeout.
                return RunRecord(spec.name, Verdict.timeout(), timeout)
    elapsed = time.monotonic() - start
    return RunRecord(spec.name, _parse_output(output, proc.returncode), elapsed)


def _kill(proc: subprocess.Popen, grace: float) -> None:
    proc.terminate()
    try:
        proc.wait(timeout=grace)
    except subprocess.TimeoutExpired:
        proc.kill()
    try:
        proc.communicate(timeout=GRACE_SECONDS)
    except (subprocess.TimeoutExpired, ValueError):
        pass


def _parse_output(output: str, returncode: int | None) -> Verdict:
    lines = output.splitlines()
    if not lines or not lines[0].strip():
        return Verdict.error(f"no output (exit code {returncode})")
    first = lines[0].strip()
    if not _VERDICT_RE.fullmatch(first):
        return Verdict.error(f"unrecognized verdict line: {first!r}")
    if first.lower() == "unsat":
        return Verdict.unsat()
    evidence = None
    if len(lines) > 1 and lines[1].strip():
        try:
            evidence = parse_evidence(lines[1])
        except EvidenceError as exc:
            return Verdict.error(f"malformed evidence line: {exc}")
    return Verdict.sat(evidence)


def as_solver_spec(spec: ExternalSolverSpec, supports_evidence: bool = True) -> SolverSpec:
    """Wrap an external solver for use in a portfolio."""

    def run(formula: Formula, timeout: float, cancel: threading.Event) -> RunRecord:
        record = invoke(spec, formula, timeout, cancel)
        if record.verdict.is_timeout:
            return RunRecord(record.solver, record.verdict, timeout)
        return record

    return SolverSpec(
        name=spec.name,
        kind="external",
        run=run,
        supports_evidence=supports_evidence,
        detail=spec.path,
    )
