"""Ultimately periodic words and the satisfaction check behind ``-e``.

A :class:`LassoWord` denotes the infinite word ``prefix . loop^omega`` where
every position is the set of propositions that hold there (anything absent
is false).  :func:`evaluate` decides ``word |= formula`` exactly, via
fixpoint computation over the finitely many positions of the lasso.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .formulas import (
    IDENTIFIER_RE,
    And,
    FalseConst,
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
    TrueConst,
    Until,
)

__all__ = ["LassoWord", "evaluate", "parse_evidence", "print_evidence", "EvidenceError"]

State = frozenset[str]


def _as_state(props: Iterable[str]) -> State:
    state = frozenset(props)
    for name in state:
        if not isinstance(name, str) or not IDENTIFIER_RE.fullmatch(name):
            raise ValueError(f"invalid proposition name in state: {name!r}")
    return state


@dataclass(frozen=True)
class LassoWord:
    """The infinite word ``prefix . loop^omega``; the loop is nonempty."""

    prefix: tuple[State, ...]
    loop: tuple[State, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(_as_state(s) for s in self.prefix))
        object.__setattr__(self, "loop", tuple(_as_state(s) for s in self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    @classmethod
    def make(
        cls, prefix: Iterable[Iterable[str]] = (), loop: Iterable[Iterable[str]] = ()
    ) -> "LassoWord":
        return cls(tuple(frozenset(s) for s in prefix), tuple(frozenset(s) for s in loop))

    def state_at(self, i: int) -> State:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]

    def unrolled_once(self) -> "LassoWord":
        """The same word with one loop copy moved into the prefix."""
        return LassoWord(self.prefix + self.loop, self.loop)


def evaluate(word: LassoWord, formula: Formula) -> bool:
    """Exact decision of ``word |= formula`` under standard LTL semantics.

    Works over positions ``0 .. len(prefix)+len(loop)-1`` with the loop-back
    successor; Until/Finally are least fixpoints, Release/Globally greatest
    fixpoints, so the answer is exact rather than a bounded approximation.
    """
    n = len(word.prefix) + len(word.loop)
    loop_start = len(word.prefix)
    states = [word.state_at(i) for i in range(n)]
    succ = [i + 1 for i in range(n)]
    succ[n - 1] = loop_start

    memo: dict[Formula, list[bool]] = {}

    def vec(f: Formula) -> list[bool]:
        cached = memo.get(f)
        if cached is not None:
            return cached
        t = type(f)
        if t is TrueConst:
            v = [True] * n
        elif t is FalseConst:
            v = [False] * n
        elif t is Prop:
            v = [f.name in states[i] for i in range(n)]
        elif t is Not:
            x = vec(f.operand)
            v = [not b for b in x]
        elif t is Next:
            x = vec(f.operand)
            v = [x[succ[i]] for i in range(n)]
        elif t is And:
            a, b = vec(f.left), vec(f.right)
            v = [a[i] and b[i] for i in range(n)]
        elif t is Or:
            a, b = vec(f.left), vec(f.right)
            v = [a[i] or b[i] for i in range(n)]
        elif t is Implies:
            a, b = vec(f.left), vec(f.right)
            v = [(not a[i]) or b[i] for i in range(n)]
        elif t is Iff:
            a, b = vec(f.left), vec(f.right)
            v = [a[i] == b[i] for i in range(n)]
        elif t is Until:
            a, b = vec(f.left), vec(f.right)
            v = _lfp(a, b, succ)
        elif t is Release:
            a, b = vec(f.left), vec(f.right)
            v = _gfp(a, b, succ)
        elif t is Globally:
            # G x  ==  false R x
            x = vec(f.operand)
            v = _gfp([False] * n, x, succ)
        elif t is Finally:
            # F x  ==  true U x
            x = vec(f.operand)
            v = _lfp([True] * n, x, succ)
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[f] = v
        return v

    return vec(formula)[0]


def _lfp(left: list[bool], right: list[bool], succ: list[int]) -> list[bool]:
    # Least fixpoint of  v[i] = right[i] or (left[i] and v[succ[i]]).
    n = len(succ)
    v = [False] * n
    for _ in range(n + 1):
        nv = [right[i] or (left[i] and v[succ[i]]) for i in range(n)]
        if nv == v:
            break
        v = nv
    return v


def _gfp(left: list[bool], right: list[bool], succ: list[int]) -> list[bool]:
    # Greatest fixpoint of  v[i] = right[i] and (left[i] or v[succ[i]]).
    n = len(succ)
    v = [True] * n
    for _ in range(n + 1):
        nv = [right[i] and (left[i] or v[succ[i]]) for i in range(n)]
        if nv == v:
            break
        v = nv
    return v


# ---------------------------------------------------------------------------
# Evidence text format
#
# A state lists the true propositions separated by spaces; prefix states are
# joined with "," and separated from the loop by ";"; the loop is always
# wrapped in "(...)".  "(b)" is the word with empty prefix and the one-state
# loop where only b holds; "a,b;(c)" has prefix [{a},{b}] and loop [{c}].


class EvidenceError(ValueError):
    """Malformed evidence text."""


def print_evidence(word: LassoWord) -> str:
    """Canonical text for a lasso word (propositions sorted inside states)."""
    loop = ",".join(_state_text(s) for s in word.loop)
    if word.prefix:
        prefix = ",".join(_state_text(s) for s in word.prefix)
        return f"{prefix};({loop})"
    return f"({loop})"


def _state_text(state: State) -> str:
    return " ".join(sorted(state))


def parse_evidence(text: str) -> LassoWord:
    """Inverse of :func:`print_evidence`."""
    s = text.strip()
    if not s:
        raise EvidenceError("empty evidence text")
    if ";" in s:
        prefix_text, loop_text = s.split(";", 1)
        prefix = tuple(_parse_state(part) for part in prefix_text.split(","))
    else:
        prefix_text, loop_text = None, s
        prefix = ()
    loop_text = loop_text.strip()
    if not (loop_text.startswith("(") and loop_text.endswith(")")):
        raise EvidenceError(f"loop part must be parenthesized: {text!r}")
    inner = loop_text[1:-1]
    loop = tuple(_parse_state(part) for part in inner.split(","))
    return LassoWord(prefix, loop)


def _parse_state(part: str) -> State:
    names = part.split()
    for name in names:
        if not IDENTIFIER_RE.fullmatch(name):
            raise EvidenceError(f"invalid proposition name in evidence: {name!r}")
    return frozenset(names)
