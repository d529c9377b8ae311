"""Explicit-state engine: initial states, successors, breadth-first reachability.

States are value tuples in variable declaration order.  Expressions are
compiled to nested Python closures once per model; TRANS conjuncts of the
shape ``next(v) = e`` are used as functional assignments so that only
genuinely nondeterministic variables are enumerated.

Iteration order is fixed (declaration order, canonical value order), so every
result is reproducible bit for bit.  Models and engines are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from mbsa.diagnostics import ResourceCapError
from mbsa.sts.check import TypedModel
from mbsa.sts.model import (
    BinOp,
    BoolConst,
    BoolType,
    Expr,
    InSet,
    IntConst,
    Ite,
    Name,
    Next,
    UnOp,
    conjuncts,
    value_in_type,
)

DEFAULT_STATE_CAP = 10_000_000


@dataclass
class Trace:
    """A finite execution: state 0 satisfies INIT, steps satisfy TRANS, all
    states satisfy INVAR.  One step is one discrete time unit."""

    states: list[dict]

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]


class Engine:
    """Compiled evaluator and enumerator for one typed model."""

    def __init__(self, tm: TypedModel, cap: int = DEFAULT_STATE_CAP):
        self.tm = tm
        self.cap = cap
        self.nvars = len(tm.var_types)
        self._define_fns: dict[str, object] = {}
        self._compile_cache: dict[int, object] = {}

        trans_conj = []
        for e in tm.model.trans:
            trans_conj.extend(conjuncts(e))
        self._trans_assign, self._trans_checks = self._split_assignments(trans_conj, nxt=True)
        init_conj = []
        for e in tm.model.init:
            init_conj.extend(conjuncts(e))
        self._init_assign, self._init_checks = self._split_assignments(init_conj, nxt=False)
        self._invar_fns = [self.compile(e) for e in tm.model.invar]
        self._trans_check_fns = [self.compile(e) for e in self._trans_checks]
        self._init_check_fns = [self.compile(e) for e in self._init_checks]

    # -- compilation --------------------------------------------------------

    def compile(self, e: Expr):
        """Compile an expression to a function of (state, next_state)."""
        # the cache entry keeps the node alive: id() keys are only stable
        # while the object is
        hit = self._compile_cache.get(id(e))
        if hit is not None and hit[0] is e:
            return hit[1]
        fn = self._compile(e)
        self._compile_cache[id(e)] = (e, fn)
        return fn

    def _define_fn(self, name: str):
        fn = self._define_fns.get(name)
        if fn is None:
            self._define_fns[name] = lambda s, t: None  # cycle guard; checker rejects real cycles
            fn = self._compile(self.tm.defines[name])
            self._define_fns[name] = fn
        return fn

    def _compile(self, e: Expr):
        tm = self.tm
        if isinstance(e, BoolConst):
            v = e.value
            return lambda s, t: v
        if isinstance(e, IntConst):
            v = e.value
            return lambda s, t: v
        if isinstance(e, Name):
            idx = tm.var_index.get(e.name)
            if idx is not None:
                return lambda s, t, i=idx: s[i]
            if e.name in tm.defines:
                return self._define_fn(e.name)
            lit = e.name
            return lambda s, t: lit
        if isinstance(e, Next):
            idx = tm.var_index[e.name]
            return lambda s, t, i=idx: t[i]
        if isinstance(e, UnOp):
            f = self._compile(e.operand)
            if e.op == "!":
                return lambda s, t: not f(s, t)
            return lambda s, t: -f(s, t)
        if isinstance(e, BinOp):
            fl = self._compile(e.left)
            fr = self._compile(e.right)
            op = e.op
            if op == "&":
                return lambda s, t: fl(s, t) and fr(s, t)
            if op == "|":
                return lambda s, t: fl(s, t) or fr(s, t)
            if op == "->":
                return lambda s, t: (not fl(s, t)) or fr(s, t)
            if op == "<->":
                return lambda s, t: fl(s, t) == fr(s, t)
            if op == "=":
                return lambda s, t: fl(s, t) == fr(s, t)
            if op == "!=":
                return lambda s, t: fl(s, t) != fr(s, t)
            if op == "<":
                return lambda s, t: fl(s, t) < fr(s, t)
            if op == "<=":
                return lambda s, t: fl(s, t) <= fr(s, t)
            if op == ">":
                return lambda s, t: fl(s, t) > fr(s, t)
            if op == ">=":
                return lambda s, t: fl(s, t) >= fr(s, t)
            if op == "+":
                return lambda s, t: fl(s, t) + fr(s, t)
            if op == "-":
                return lambda s, t: fl(s, t) - fr(s, t)
            raise AssertionError(op)
        if isinstance(e, Ite):
            fc = self._compile(e.cond)
            ft = self._compile(e.then)
            fe = self._compile(e.other)
            return lambda s, t: ft(s, t) if fc(s, t) else fe(s, t)
        if isinstance(e, InSet):
            f = self._compile(e.operand)
            vals = frozenset(m.value if isinstance(m, (IntConst, BoolConst)) else m.name for m in e.members)
            return lambda s, t: f(s, t) in vals
        raise AssertionError(f"unhandled node {e!r}")

    # -- functional-assignment extraction ------------------------------------

    def _split_assignments(self, conj: list[Expr], nxt: bool):
        """Partition conjuncts into functional assignments and residual checks.

        In TRANS context an assignment is ``next(v) = rhs`` (or ``<->``, or a
        bare ``next(v)`` / ``!next(v)``); in INIT context the same with plain
        variable references.  Assignments whose right-hand sides depend
        cyclically on other assigned variables are demoted to checks.
        """
        tm = self.tm

        def target_of(side):
            if nxt and isinstance(side, Next):
                return side.name
            if not nxt and isinstance(side, Name) and side.name in tm.var_index:
                return side.name
            return None

        candidates: dict[str, Expr] = {}
        checks: list[Expr] = []
        owned: list[tuple[str, Expr]] = []
        for c in conj:
            rhs = None
            var = None
            if isinstance(c, BinOp) and c.op in ("=", "<->"):
                var = target_of(c.left)
                rhs = c.right
                if var is None:
                    var = target_of(c.right)
                    rhs = c.left
            elif nxt and isinstance(c, Next):
                var, rhs = c.name, BoolConst(True)
            elif not nxt and isinstance(c, Name) and c.name in tm.var_index and isinstance(tm.var_types[tm.var_index[c.name]], BoolType):
                var, rhs = c.name, BoolConst(True)
            elif isinstance(c, UnOp) and c.op == "!":
                inner = c.operand
                v = target_of(inner) if isinstance(inner, (Next, Name)) else None
                if v is not None and isinstance(tm.var_types[tm.var_index[v]], BoolType):
                    var, rhs = v, BoolConst(False)
            if var is None or var in candidates:
                checks.append(c)
            else:
                candidates[var] = rhs
                owned.append((var, c))

        # dependency order among assigned variables (through defines)
        def dep_refs(e: Expr) -> set[str]:
            return self._refs(e, nxt=nxt)

        order: list[str] = []
        placed: set[str] = set()
        pending = dict(candidates)
        while pending:
            progress = False
            for v in [n for n, _ in self.tm.model.variables if n in pending]:
                deps = dep_refs(pending[v]) & set(pending)
                deps.discard(v)
                if deps <= placed:
                    order.append(v)
                    placed.add(v)
                    del pending[v]
                    progress = True
            if not progress:
                # cyclic: demote the remaining assignments to plain checks
                for v in [n for n, _ in self.tm.model.variables if n in pending]:
                    checks.append(dict(owned)[v])
                    del pending[v]
                break

        assigns = [(tm.var_index[v], self.compile(candidates[v]), tm.var_types[tm.var_index[v]]) for v in order]
        return assigns, checks

    def _refs(self, e: Expr, nxt: bool, _seen: frozenset = frozenset()) -> set[str]:
        """Variable names referenced by ``e`` (next-state refs when ``nxt``),
        expanded through defines."""
        out: set[str] = set()
        stack = [e]
        seen_defs: set[str] = set()
        while stack:
            n = stack.pop()
            if isinstance(n, Next):
                if nxt:
                    out.add(n.name)
            elif isinstance(n, Name):
                if n.name in self.tm.defines:
                    if n.name not in seen_defs:
                        seen_defs.add(n.name)
                        stack.append(self.tm.defines[n.name])
                elif not nxt and n.name in self.tm.var_index:
                    out.add(n.name)
            elif isinstance(n, UnOp):
                stack.append(n.operand)
            elif isinstance(n, BinOp):
                stack.append(n.left)
                stack.append(n.right)
            elif isinstance(n, Ite):
                stack.extend((n.cond, n.then, n.other))
            elif isinstance(n, InSet):
                stack.append(n.operand)
        return out

    # -- enumeration ----------------------------------------------------------

    def _enumerate(self, assigns, check_fns, base, free_idx, invar: bool):
        """Yield completed tuples: free variables from their domains, assigned
        variables computed, all residual constraints verified."""
        tm = self.tm
        domains = [tm.domains[i] for i in free_idx]
        size = 1
        for d in domains:
            size *= len(d)
            if size > self.cap:
                raise ResourceCapError(f"enumeration of {size}+ candidate states exceeds cap {self.cap}")
        invar_fns = self._invar_fns if invar else ()
        for combo in itertools.product(*domains):
            t = list(base) if base is not None else [None] * self.nvars
            for i, v in zip(free_idx, combo):
                t[i] = v
            ok = True
            s = base if base is not None else t
            for i, fn, ty in assigns:
                v = fn(s, t)
                if not value_in_type(v, ty):
                    ok = False
                    break
                t[i] = v
            if not ok:
                continue
            tt = tuple(t)
            src = base if base is not None else tt
            if all(fn(src, tt) for fn in check_fns) and all(fn(tt, None) for fn in invar_fns):
                yield tt

    def init_tuples(self) -> list[tuple]:
        assigned = {i for i, _, _ in self._init_assign}
        free = [i for i in range(self.nvars) if i not in assigned]
        return list(self._enumerate(self._init_assign, self._init_check_fns, None, free, invar=True))

    def succ_tuples(self, s: tuple) -> list[tuple]:
        assigned = {i for i, _, _ in self._trans_assign}
        free = [i for i in range(self.nvars) if i not in assigned]
        return list(self._enumerate(self._trans_assign, self._trans_check_fns, s, free, invar=True))

    # -- state conversion ------------------------------------------------------

    def to_dict(self, s: tuple) -> dict:
        return {name: s[i] for i, (name, _) in enumerate(self.tm.model.variables)}

    def to_tuple(self, d: dict) -> tuple:
        return tuple(d[name] for name, _ in self.tm.model.variables)

    # -- reachability -----------------------------------------------------------

    def reach_tuples(self, target_fn, bound: int | None = None, state_filter=None):
        """Shortest witness (list of tuples) whose last state satisfies the
        target, or None.  ``bound`` limits the number of steps.

        ``state_filter`` restricts the explored state space (equivalent to
        conjoining an INVAR): states failing it are discarded everywhere.
        """
        inits = self.init_tuples()
        if state_filter is not None:
            inits = [s for s in inits if state_filter(s)]
        parents: dict[tuple, tuple | None] = {}
        frontier: list[tuple] = []
        for s in inits:
            if s not in parents:
                parents[s] = None
                frontier.append(s)
        for s in frontier:
            if target_fn(s, None):
                return [s]
        depth = 0
        while frontier:
            if bound is not None and depth >= bound:
                return None
            depth += 1
            nxt_frontier: list[tuple] = []
            for s in frontier:
                for t in self.succ_tuples(s):
                    if t in parents:
                        continue
                    if state_filter is not None and not state_filter(t):
                        continue
                    if len(parents) >= self.cap:
                        raise ResourceCapError(f"stored states exceed cap {self.cap}")
                    parents[t] = s
                    if target_fn(t, None):
                        path = [t]
                        cur = t
                        while parents[cur] is not None:
                            cur = parents[cur]
                            path.append(cur)
                        path.reverse()
                        return path
                    nxt_frontier.append(t)
            frontier = nxt_frontier
        return None

    def reachable_tuples(self, bound: int | None = None) -> set[tuple]:
        """All states reachable within ``bound`` steps (all, when unbounded)."""
        visited = set(self.init_tuples())
        frontier = list(visited)
        depth = 0
        while frontier and (bound is None or depth < bound):
            depth += 1
            nxt_frontier = []
            for s in frontier:
                for t in self.succ_tuples(s):
                    if t not in visited:
                        if len(visited) >= self.cap:
                            raise ResourceCapError(f"stored states exceed cap {self.cap}")
                        visited.add(t)
                        nxt_frontier.append(t)
            frontier = nxt_frontier
        return visited


def _engine(tm: TypedModel, cap: int | None = None) -> Engine:
    cache = getattr(tm, "_engine", None)
    if cache is None or (cap is not None and cache.cap != cap):
        cache = Engine(tm, cap if cap is not None else DEFAULT_STATE_CAP)
        tm._engine = cache
    return cache


def initial_states(tm: TypedModel, cap: int | None = None) -> list[dict]:
    """Exactly the states satisfying INIT and INVAR, in deterministic order."""
    eng = _engine(tm, cap)
    return [eng.to_dict(s) for s in eng.init_tuples()]


def successors(tm: TypedModel, state: dict, cap: int | None = None) -> list[dict]:
    """States s' with (state, s') satisfying all TRANS and s' satisfying INVAR.

    An empty list is a deadlock (out-of-range assignments and INVAR
    violations remove successors); callers decide what that means.
    """
    eng = _engine(tm, cap)
    return [eng.to_dict(t) for t in eng.succ_tuples(eng.to_tuple(state))]


def reach(tm: TypedModel, target: Expr, bound: int | None = None, cap: int | None = None) -> Trace | None:
    """Shortest trace whose final state satisfies ``target``, else None.

    ``target`` must be a boolean current-state expression already checked
    against this model.  ``bound`` caps the number of steps; None explores to
    the full fixpoint.
    """
    eng = _engine(tm, cap)
    path = eng.reach_tuples(eng.compile(target), bound)
    if path is None:
        return None
    return Trace([eng.to_dict(s) for s in path])


def replay_ok(tm: TypedModel, trace: Trace) -> bool:
    """Check that a trace replays: INIT at state 0, TRANS per step, INVAR everywhere."""
    eng = _engine(tm)
    tuples = [eng.to_tuple(d) for d in trace.states]
    if not tuples:
        return False
    if tuples[0] not in eng.init_tuples():
        return False
    for s, t in zip(tuples, tuples[1:]):
        if t not in eng.succ_tuples(s):
            return False
    return True
