"""Internal reference decision procedures.

Three in-process solvers back the portfolio so it works without any
third-party binaries:

* :func:`tableau_check` -- a complete, sound (within budget) graph tableau.
  Nodes are locally consistent, fully expanded formula sets; an accepting
  lasso is a reachable cycle fulfilling every Until-eventuality on it, found
  via SCC analysis, and is returned directly as evidence.
* :func:`lasso_search` -- iterative-deepening search over the same expansion
  graph for an accepting lasso of bounded total length; sat-only.
* :func:`sat_shortcut` -- a cheap syntactic filter that proposes one-state
  loops from "obligation" literal sets and keeps a proposal only if the
  trace evaluator confirms it; sat-only, never authoritative on its own.

Expansion rules: ``a U b`` expands to ``b | (a & X(a U b))``, ``a R b`` to
``b & (a | X(a R b))``; And/Or saturate; the successor obligation set is the
set of operands of X-formulas in a node.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from math import lcm

from .formulas import (
    And,
    FalseConst,
    Formula,
    Next,
    Not,
    Or,
    Prop,
    Release,
    TrueConst,
    Until,
    closure,
    nnf,
    prop_names,
)
from .lasso import LassoWord, evaluate

__all__ = [
    "Budget",
    "Verdict",
    "tableau_check",
    "lasso_search",
    "sat_shortcut",
    "STRATEGY_NAMES",
    "run_strategy",
]

#: Cap on the merged-evidence word length when independent subproblems are
#: recombined; beyond this the Sat verdict is returned without evidence.
_MERGE_CAP = 100_000

#: Obligation families larger than this make sat_shortcut give up.
_FAMILY_CAP = 4096


class _Stop(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


@dataclass
class Budget:
    """Work budget for a single check: node count, deadline, cancellation.

    ``deadline`` is an absolute ``time.monotonic()`` value.  The cancel
    event is polled at every expansion step, so cancellation is honored
    within well under 10 ms of work.
    """

    max_nodes: int | None = 1_000_000
    deadline: float | None = None
    cancel: threading.Event | None = None
    nodes: int = 0

    def charge(self, amount: int = 1) -> None:
        self.nodes += amount
        if self.cancel is not None and self.cancel.is_set():
            raise _Stop("cancelled")
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise _Stop("timeout")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Stop("timeout")


@dataclass(frozen=True)
class Verdict:
    """Solver answer: sat (with optional evidence), unsat, or unknown."""

    kind: str  # "sat" | "unsat" | "unknown"
    evidence: LassoWord | None = None
    reason: str | None = None  # for unknown: "timeout" | "cancelled" | "solver-error"
    detail: str | None = None

    @classmethod
    def sat(cls, evidence: LassoWord | None = None) -> "Verdict":
        return cls("sat", evidence=evidence)

    @classmethod
    def unsat(cls) -> "Verdict":
        return cls("unsat")

    @classmethod
    def timeout(cls) -> "Verdict":
        return cls("unknown", reason="timeout")

    @classmethod
    def cancelled(cls) -> "Verdict":
        return cls("unknown", reason="cancelled")

    @classmethod
    def error(cls, detail: str) -> "Verdict":
        return cls("unknown", reason="solver-error", detail=detail)

    @property
    def is_sat(self) -> bool:
        return self.kind == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.kind == "unsat"

    @property
    def is_definitive(self) -> bool:
        return self.kind in ("sat", "unsat")

    @property
    def is_timeout(self) -> bool:
        return self.kind == "unknown" and self.reason == "timeout"

    @property
    def is_cancelled(self) -> bool:
        return self.kind == "unknown" and self.reason == "cancelled"

    def word(self) -> str:
        return self.kind


# Node kinds for the integer-encoded formula universe.
_K_TRUE, _K_FALSE, _K_LIT, _K_NEXT, _K_AND, _K_OR, _K_UNTIL, _K_RELEASE = range(8)

_KIND_OF = {
    TrueConst: _K_TRUE,
    FalseConst: _K_FALSE,
    Prop: _K_LIT,
    Not: _K_LIT,
    Next: _K_NEXT,
    And: _K_AND,
    Or: _K_OR,
    Until: _K_UNTIL,
    Release: _K_RELEASE,
}


class _Tableau:
    """Shared expansion machinery for tableau_check and lasso_search.

    Formulas are encoded as dense integer ranks (closure order) so the hot
    set operations run on ints.  All iteration orders are pinned (formulas
    by rank, branches left-first, nodes by creation id), which makes
    verdicts and evidence deterministic for a fixed formula and budget.
    """

    def __init__(self, root: Formula, budget: Budget) -> None:
        self.budget = budget
        rank: dict[Formula, int] = {}
        universe: list[Formula] = []

        def intern_formula(g: Formula) -> int:
            r = rank.get(g)
            if r is None:
                r = len(universe)
                rank[g] = r
                universe.append(g)
            return r

        for g in closure(root):
            intern_formula(g)
        for g in list(universe):
            if type(g) in (Until, Release):
                intern_formula(Next(g))

        n = len(universe)
        kind = [0] * n
        arg1 = [-1] * n  # operand / left
        arg2 = [-1] * n  # right
        comp = [-1] * n  # complementary literal, when it exists in the universe
        for r, g in enumerate(universe):
            t = type(g)
            k = _KIND_OF.get(t)
            if k is None:
                raise TypeError(f"formula not in negation normal form: {g!r}")
            if t is Not and type(g.operand) is not Prop:
                raise TypeError(f"formula not in negation normal form: {g!r}")
            kind[r] = k
            if t is Next:
                arg1[r] = rank[g.operand]
            elif t in (And, Or, Until, Release):
                arg1[r] = rank[g.left]
                arg2[r] = rank[g.right]
            if t is Prop:
                other = rank.get(Not(g))
                if other is not None:
                    comp[r] = other
                    comp[other] = r
        next_of = [-1] * n  # rank of X(g) for Until/Release g
        for r, g in enumerate(universe):
            if kind[r] in (_K_UNTIL, _K_RELEASE):
                next_of[r] = rank[Next(g)]

        self.universe = universe
        self.root_rank = rank[root]
        self._kind = kind
        self._arg1 = arg1
        self._arg2 = arg2
        self._comp = comp
        self._next_of = next_of
        # Acceptance obligations.  An Until whose right side is ``true`` is
        # fulfilled at every position (and True never appears in node sets,
        # so it could not be marked), hence it imposes no obligation.
        self.untils: tuple[tuple[int, int], ...] = tuple(
            (r, arg2[r])
            for r in range(n)
            if kind[r] == _K_UNTIL and kind[arg2[r]] != _K_TRUE
        )
        self._prop_name = {
            r: g.name for r, g in enumerate(universe) if type(g) is Prop
        }
        self._expand_cache: dict[frozenset[int], tuple[frozenset[int], ...]] = {}
        self.nodes: dict[frozenset[int], int] = {}
        self.node_sets: list[frozenset[int]] = []
        self._succ: dict[int, tuple[int, ...]] = {}

    # -- expansion ---------------------------------------------------------

    def expand(self, obligations: frozenset[int]) -> tuple[frozenset[int], ...]:
        cached = self._expand_cache.get(obligations)
        if cached is not None:
            return cached
        kind, arg1, arg2 = self._kind, self._arg1, self._arg2
        comp, next_of = self._comp, self._next_of
        charge = self.budget.charge
        out: list[frozenset[int]] = []
        seen: set[frozenset[int]] = set()
        stack: list[tuple[set[int], set[int]]] = [(set(), set(obligations))]
        while stack:
            charge()
            done, todo = stack.pop()
            if not todo:
                node = frozenset(done)
                if node not in seen:
                    seen.add(node)
                    out.append(node)
                continue
            g = min(todo)
            todo.discard(g)
            k = kind[g]
            if k == _K_TRUE:
                stack.append((done, todo))
            elif k == _K_FALSE:
                continue
            elif k == _K_LIT:
                c = comp[g]
                if c >= 0 and c in done:
                    continue
                done.add(g)
                stack.append((done, todo))
            elif k == _K_NEXT:
                done.add(g)
                stack.append((done, todo))
            elif k == _K_AND:
                done.add(g)
                left, right = arg1[g], arg2[g]
                if left not in done:
                    todo.add(left)
                if right not in done:
                    todo.add(right)
                stack.append((done, todo))
            elif k == _K_OR:
                done.add(g)
                left, right = arg1[g], arg2[g]
                if (
                    left in done
                    or right in done
                    or kind[left] == _K_TRUE
                    or kind[right] == _K_TRUE
                ):
                    stack.append((done, todo))
                elif self._disjunct_blocked(left, done):
                    todo.add(right)
                    stack.append((done, todo))
                elif self._disjunct_blocked(right, done):
                    todo.add(left)
                    stack.append((done, todo))
                else:
                    alt_todo = set(todo)
                    alt_todo.add(right)
                    stack.append((set(done), alt_todo))  # explored second
                    todo.add(left)
                    stack.append((done, todo))
            elif k == _K_UNTIL:
                done.add(g)
                if arg2[g] in done:
                    stack.append((done, todo))
                else:
                    alt_todo = set(todo)
                    alt_todo.add(arg1[g])
                    alt_todo.add(next_of[g])
                    stack.append((set(done), alt_todo))  # delay, explored second
                    todo.add(arg2[g])
                    stack.append((done, todo))  # fulfil now, explored first
            else:  # _K_RELEASE
                done.add(g)
                if arg2[g] not in done:
                    todo.add(arg2[g])
                nxt = next_of[g]
                if arg1[g] in done or nxt in done:
                    stack.append((done, todo))
                else:
                    alt_todo = set(todo)
                    alt_todo.add(nxt)
                    stack.append((set(done), alt_todo))  # keep releasing
                    todo.add(arg1[g])
                    stack.append((done, todo))  # release now, explored first
        result = tuple(out)
        self._expand_cache[obligations] = result
        return result

    def _disjunct_blocked(self, g: int, done: set[int]) -> bool:
        """A disjunct that can never hold in this node."""
        k = self._kind[g]
        if k == _K_FALSE:
            return True
        if k != _K_LIT:
            return False
        c = self._comp[g]
        return c >= 0 and c in done

    # -- graph -------------------------------------------------------------

    def intern(self, node: frozenset[int]) -> int:
        node_id = self.nodes.get(node)
        if node_id is None:
            node_id = len(self.node_sets)
            self.nodes[node] = node_id
            self.node_sets.append(node)
        return node_id

    def initial_ids(self) -> list[int]:
        return [self.intern(n) for n in self.expand(frozenset((self.root_rank,)))]

    def successors(self, node_id: int) -> tuple[int, ...]:
        succ = self._succ.get(node_id)
        if succ is None:
            kind, arg1 = self._kind, self._arg1
            node = self.node_sets[node_id]
            label = frozenset(arg1[g] for g in node if kind[g] == _K_NEXT)
            succ = tuple(self.intern(n) for n in self.expand(label))
            self._succ[node_id] = succ
        return succ

    def state_of(self, node_id: int) -> frozenset[str]:
        names = self._prop_name
        return frozenset(
            names[g] for g in self.node_sets[node_id] if g in names
        )

    def cycle_accepting(self, cycle_ids: list[int]) -> bool:
        node_sets = [self.node_sets[i] for i in cycle_ids]
        for u, r in self.untils:
            if not any(u not in nd or r in nd for nd in node_sets):
                return False
        return True


# ---------------------------------------------------------------------------
# Complete check


def tableau_check(f: Formula, budget: Budget | None = None) -> Verdict:
    """Decide satisfiability of ``f`` within ``budget``.

    Sat verdicts carry a lasso extracted from an accepting cycle of the
    tableau graph; Unsat means the graph was exhausted without one; budget
    exhaustion yields Unknown(timeout), cancellation Unknown(cancelled).

    Variable-disjoint top-level conjuncts are checked independently and
    their lassos merged, which keeps wide but loosely coupled conjunctions
    (one contradictory conjunct among many independent ones) tractable.
    """
    if budget is None:
        budget = Budget()
    words: list[LassoWord] = []
    unknown: str | None = None
    for component in _components(nnf(f)):
        try:
            verdict = _check_component(component, budget)
        except _Stop as stop:
            verdict = Verdict("unknown", reason=stop.reason)
        if verdict.is_unsat:
            return verdict
        if verdict.is_sat:
            words.append(verdict.evidence)
        elif unknown is None or verdict.reason == "cancelled":
            unknown = verdict.reason
    if unknown is not None:
        return Verdict("unknown", reason=unknown)
    return Verdict.sat(_merge_words(words))


def _components(g: Formula) -> list[Formula]:
    """Split a conjunction into variable-disjoint groups of conjuncts."""
    parts: list[Formula] = []
    stack = [g]
    while stack:
        h = stack.pop()
        if type(h) is And:
            stack.append(h.right)
            stack.append(h.left)
        else:
            parts.append(h)
    if len(parts) <= 1:
        return [g]
    part_props = [prop_names(p) for p in parts]
    parent = list(range(len(parts)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[str, int] = {}
    for i, props in enumerate(part_props):
        for name in props:
            j = owner.setdefault(name, i)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[Formula]] = {}
    for i, part in enumerate(parts):
        groups.setdefault(find(i), []).append(part)
    components = []
    for key in sorted(groups):
        conjuncts = groups[key]
        acc = conjuncts[0]
        for part in conjuncts[1:]:
            acc = And(acc, part)
        components.append(acc)
    return components


def _merge_words(words: list[LassoWord]) -> LassoWord | None:
    """Pointwise union of lassos over disjoint proposition sets."""
    if not words:
        return None
    if len(words) == 1:
        return words[0]
    prefix_len = max(len(w.prefix) for w in words)
    loop_len = lcm(*(len(w.loop) for w in words))
    if prefix_len + loop_len > _MERGE_CAP:
        return None
    prefix = tuple(
        frozenset().union(*(w.state_at(k) for w in words)) for k in range(prefix_len)
    )
    loop = tuple(
        frozenset().union(*(w.state_at(prefix_len + k) for w in words))
        for k in range(loop_len)
    )
    return LassoWord(prefix, loop)


def _check_component(g: Formula, budget: Budget) -> Verdict:
    tab = _Tableau(g, budget)
    init_ids = tab.initial_ids()
    if not init_ids:
        return Verdict.unsat()
    scc = _accepting_scc(tab)
    if scc is None:
        return Verdict.unsat()
    return Verdict.sat(_extract_word(tab, init_ids, scc))


def _accepting_scc(tab: _Tableau) -> list[int] | None:
    """First (in Tarjan completion order) accepting SCC, or None.

    Successors are expanded lazily, so the graph grows while the search
    runs; completed SCCs are tested immediately, which lets satisfiable
    checks stop before the whole graph is built.
    """
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = 0
    start = 0
    while start < len(tab.node_sets):
        if start in index:
            start += 1
            continue
        work: list[tuple[int, int]] = [(start, 0)]
        while work:
            v, child_idx = work.pop()
            if child_idx == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = tab.successors(v)
            advanced = False
            for k in range(child_idx, len(succ)):
                w = succ[k]
                if w not in index:
                    work.append((v, k + 1))
                    work.append((w, 0))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                component.reverse()
                if _scc_accepting(tab, component):
                    return component
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
        start += 1
    return None


def _scc_accepting(tab: _Tableau, component: list[int]) -> bool:
    nontrivial = len(component) > 1 or component[0] in tab.successors(component[0])
    if not nontrivial:
        return False
    node_sets = [tab.node_sets[i] for i in component]
    for u, r in tab.untils:
        if not any(u not in nd or r in nd for nd in node_sets):
            return False
    return True


def _extract_word(tab: _Tableau, init_ids: list[int], scc: list[int]) -> LassoWord:
    members = set(scc)

    # Shortest path from an initial node into the SCC (BFS, deterministic).
    parent: dict[int, int | None] = {}
    queue = []
    for i in init_ids:
        if i not in parent:
            parent[i] = None
            queue.append(i)
    entry = None
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        if v in members:
            entry = v
            break
        for w in tab.successors(v):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    assert entry is not None, "SCC must be reachable"
    path: list[int] = []
    v: int | None = entry
    while v is not None:
        path.append(v)
        v = parent[v]
    path.reverse()

    # A cycle through one fulfillment witness per pending Until.
    cycle = [entry]
    for u, r in tab.untils:
        if not any(u in tab.node_sets[i] for i in scc):
            continue
        witness = next(
            i for i in scc if u not in tab.node_sets[i] or r in tab.node_sets[i]
        )
        if witness != cycle[-1]:
            cycle.extend(_path_within(tab, members, cycle[-1], witness))
    cycle.extend(_path_within(tab, members, cycle[-1], entry))
    cycle.pop()  # final entry duplicates cycle[0]

    prefix = tuple(tab.state_of(i) for i in path[:-1])
    loop = tuple(tab.state_of(i) for i in cycle)
    return LassoWord(prefix, loop)


def _path_within(
    tab: _Tableau, members: set[int], source: int, target: int
) -> list[int]:
    """Nodes after ``source`` up to and including ``target``, inside the SCC.

    When source equals target this finds a nontrivial cycle back to it.
    """
    parent: dict[int, int] = {}
    queue = []
    for w in tab.successors(source):
        if w in members and w not in parent:
            if w == target:
                return [w]
            parent[w] = source
            queue.append(w)
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        for w in tab.successors(v):
            if w not in members or w in parent:
                continue
            if w == target:
                hops = [w, v]
                while hops[-1] != source:
                    hops.append(parent[hops[-1]])
                hops.pop()  # drop source
                hops.reverse()
                return hops
            parent[w] = v
            queue.append(w)
    raise AssertionError("SCC is strongly connected; path must exist")


# ---------------------------------------------------------------------------
# Bounded sat-only search


def lasso_search(
    f: Formula, max_depth: int, budget: Budget | None = None
) -> LassoWord | None:
    """Iterative-deepening search for an accepting lasso of total length
    (prefix plus loop) at most ``max_depth``; never concludes unsat.

    Budget exhaustion simply yields ``None``.
    """
    try:
        word, _ = _lasso_search_status(f, max_depth, budget)
    except _Stop:
        return None
    return word


def _lasso_search_status(
    f: Formula, max_depth: int, budget: Budget | None = None
) -> tuple[LassoWord | None, bool]:
    """Returns (word, depth_limited): depth_limited is False when the whole
    reachable graph fits within the bound, i.e. deeper search cannot help."""
    if budget is None:
        budget = Budget()
    tab = _Tableau(nnf(f), budget)
    init_ids = tab.initial_ids()
    depth_limited = False
    for depth in range(1, max_depth + 1):
        word, limited = _bounded_dfs(tab, init_ids, depth)
        if word is not None:
            return word, True
        if not limited:
            return None, False
        depth_limited = True
    return None, depth_limited


def _bounded_dfs(
    tab: _Tableau, init_ids: list[int], depth: int
) -> tuple[LassoWord | None, bool]:
    limited = False
    path: list[int] = []
    position: dict[int, int] = {}
    for init in init_ids:
        tab.budget.charge()
        if init in position:
            continue
        stack: list[tuple[int, int]] = [(init, 0)]
        path.append(init)
        position[init] = 0
        while stack:
            tab.budget.charge()
            v, child_idx = stack.pop()
            succ = tab.successors(v)
            if child_idx < len(succ):
                stack.append((v, child_idx + 1))
                w = succ[child_idx]
                at = position.get(w)
                if at is not None:
                    cycle = path[at:]
                    if tab.cycle_accepting(cycle):
                        prefix = tuple(tab.state_of(i) for i in path[:at])
                        loop = tuple(tab.state_of(i) for i in cycle)
                        return LassoWord(prefix, loop), limited
                    continue
                if len(path) >= depth:
                    limited = True
                    continue
                position[w] = len(path)
                path.append(w)
                stack.append((w, 0))
            else:
                del position[v]
                path.pop()
    return None, limited


# ---------------------------------------------------------------------------
# Syntactic shortcut

Literal = tuple[str, bool]


def sat_shortcut(f: Formula, budget: Budget | None = None) -> LassoWord | None:
    """Propose one-state loops from syntactic obligation sets.

    Obligations: a literal obliges itself; X/U/R defer to the operand or
    right-hand side; conjunction takes pairwise unions; disjunction takes
    either side's family.  A consistent obligation set yields the candidate
    word looping its positive literals forever, which is returned only if
    the trace evaluator confirms it.  Soundness comes entirely from that
    confirmation; this is a filter, not a solver.
    """
    if budget is None:
        budget = Budget()
    family = _obligation_family(nnf(f))
    if family is None:
        return None
    try:
        for literals in family:
            budget.charge()
            by_name: dict[str, bool] = {}
            consistent = True
            for name, positive in literals:
                if by_name.setdefault(name, positive) != positive:
                    consistent = False
                    break
            if not consistent:
                continue
            word = LassoWord(
                (), (frozenset(name for name, positive in literals if positive),)
            )
            if evaluate(word, f):
                return word
    except _Stop:
        return None
    return None


def _obligation_family(g: Formula) -> list[frozenset[Literal]] | None:
    t = type(g)
    if t is TrueConst:
        return [frozenset()]
    if t is FalseConst:
        return []
    if t is Prop:
        return [frozenset({(g.name, True)})]
    if t is Not:
        return [frozenset({(g.operand.name, False)})]
    if t is Next:
        return _obligation_family(g.operand)
    if t in (Until, Release):
        return _obligation_family(g.right)
    if t is Or:
        left = _obligation_family(g.left)
        if left is None:
            return None
        right = _obligation_family(g.right)
        if right is None:
            return None
        merged = list(dict.fromkeys(left + right))
        return merged if len(merged) <= _FAMILY_CAP else None
    if t is And:
        left = _obligation_family(g.left)
        if left is None:
            return None
        right = _obligation_family(g.right)
        if right is None:
            return None
        if len(left) * len(right) > _FAMILY_CAP:
            return None
        product = list(dict.fromkeys(a | b for a in left for b in right))
        return product if len(product) <= _FAMILY_CAP else None
    raise TypeError(f"formula not in negation normal form: {g!r}")


# ---------------------------------------------------------------------------
# Uniform strategy interface for the portfolio

STRATEGY_NAMES = ("tableau", "lasso", "shortcut")


def run_strategy(name: str, f: Formula, budget: Budget) -> Verdict:
    """Run one internal solver to a verdict under ``budget``.

    Internal solvers that legitimately cannot answer (the sat-only searches
    on an unsatisfiable input) report Unknown(solver-error) so the
    portfolio keeps waiting on the others.
    """
    if name == "tableau":
        return tableau_check(f, budget)
    if name == "lasso":
        return _lasso_strategy(f, budget)
    if name == "shortcut":
        word = sat_shortcut(f, budget)
        if word is not None:
            return Verdict.sat(word)
        if budget.cancel is not None and budget.cancel.is_set():
            return Verdict.cancelled()
        if budget.deadline is not None and time.monotonic() > budget.deadline:
            return Verdict.timeout()
        return Verdict.error("no one-state candidate survived evaluation")
    raise ValueError(f"unknown strategy {name!r}")


def _lasso_strategy(f: Formula, budget: Budget) -> Verdict:
    depth = 4
    while True:
        try:
            word, limited = _lasso_search_status(f, depth, budget)
        except _Stop as stop:
            return Verdict("unknown", reason=stop.reason)
        if word is not None:
            return Verdict.sat(word)
        if not limited:
            return Verdict.error(f"no accepting lasso within depth {depth}")
        depth *= 2
