import random
from pathlib import Path

import pytest

from polsat.formulas import (
    FALSE,
    TRUE,
    And,
    Finally,
    Formula,
    Globally,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    Release,
    Until,
)
from polsat.lasso import LassoWord

FIXTURES = Path(__file__).parent / "fixtures"

UNARY = (Not, Next, Globally, Finally)
BINARY = (And, Or, Implies, Iff, Until, Release)


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def random_formula(rng: random.Random, size: int, props: tuple[str, ...]) -> Formula:
    """Uniform-ish random formula with exactly ``size`` AST nodes."""
    if size == 1:
        if rng.random() < 0.1:
            return TRUE if rng.random() < 0.5 else FALSE
        return Prop(rng.choice(props))
    if size == 2:
        return rng.choice(UNARY)(random_formula(rng, 1, props))
    op = rng.choice(UNARY + BINARY)
    if op in UNARY:
        return op(random_formula(rng, size - 1, props))
    left = rng.randint(1, size - 2)
    return op(
        random_formula(rng, left, props),
        random_formula(rng, size - 1 - left, props),
    )


def random_lasso(
    rng: random.Random,
    props: tuple[str, ...],
    max_prefix: int = 3,
    max_loop: int = 3,
) -> LassoWord:
    def state() -> frozenset[str]:
        return frozenset(p for p in props if rng.random() < 0.5)

    prefix = tuple(state() for _ in range(rng.randint(0, max_prefix)))
    loop = tuple(state() for _ in range(rng.randint(1, max_loop)))
    return LassoWord(prefix, loop)


def all_lassos(props: tuple[str, ...], max_prefix: int = 3, max_loop: int = 3):
    """Every lasso with bounded prefix/loop over subsets of ``props``."""
    states = _subsets(props)
    for plen in range(max_prefix + 1):
        for prefix in _tuples(states, plen):
            for llen in range(1, max_loop + 1):
                for loop in _tuples(states, llen):
                    yield LassoWord(prefix, loop)


def _subsets(props: tuple[str, ...]) -> list[frozenset[str]]:
    out = [frozenset()]
    for p in props:
        out += [s | {p} for s in out]
    return out


def _tuples(pool, length):
    if length == 0:
        yield ()
        return
    for rest in _tuples(pool, length - 1):
        for item in pool:
            yield (item,) + rest


@pytest.fixture
def stub_dir(tmp_path):
    """Factory for small executable solver stubs."""

    def make(name: str, body: str) -> str:
        path = tmp_path / name
        path.write_text(body)
        path.chmod(0o755)
        return str(path)

    return make


def sh_stub(output_lines: list[str]) -> str:
    lines = "".join(f"echo '{line}'\n" for line in output_lines)
    return f"#!/bin/sh\n{lines}"


def sleeper_stub(seconds: float, ignore_term: bool = False) -> str:
    # Single-process sleeper: no shell children to orphan.
    handler = (
        "import signal\nsignal.signal(signal.SIGTERM, signal.SIG_IGN)\n"
        if ignore_term
        else ""
    )
    return (
        "#!/usr/bin/env python3\n"
        f"{handler}"
        "import time\n"
        f"time.sleep({seconds})\n"
        "print('sat')\n"
    )
