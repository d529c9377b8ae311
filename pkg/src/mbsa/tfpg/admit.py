"""Trace admission: does a TFPG explain an activation trace?

Execution semantics.  An edge (u, v) becomes pending when u first activates;
its elapsed counter advances exactly in steps whose active mode is in the
edge's mode set (pausing, or resetting, while disabled -- pausing is the
default).  The edge may fire at any step where the counter lies inside
[tmin, tmax]; firing itself is not mode-gated.  With a finite tmax the edge
must have fired before its counter exceeds tmax.  An OR discrepancy activates
at its earliest incoming firing; an AND discrepancy activates at its latest
incoming firing, once every incoming edge has fired and every source has
activated (a source that never fails keeps the AND inactive).  Obligations of
edges into an already-activated destination are discharged (their firings are
absorbed).  A trace is admitted iff some per-edge assignment of firing steps
reproduces the given first-activation times exactly; inconsistencies are
reported against the earliest offending step.

``admits`` decides this analytically per destination node; the search over
explicit firing assignments (``admits_by_search``) is the module's reference
semantics and the test suite checks the two agree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from mbsa.tfpg.activation import ActivationTrace
from mbsa.tfpg.graph import Tfpg, TfpgEdge

REASONS = ("too-early", "too-late", "missing-cause", "and-incomplete", "mode-violation")


@dataclass(frozen=True)
class AdmitResult:
    ok: bool
    node: str | None = None
    reason: str | None = None
    step: int | None = None

    def __bool__(self) -> bool:  # pragma: no cover - convenience
        return self.ok


@dataclass(frozen=True)
class _EdgeView:
    """Per-trace view of one pending edge."""

    edge: TfpgEdge
    t_src: int
    counters: tuple[int, ...]  # counters[i] = c(t_src + i), one slot past the end
    fire_steps: tuple[int, ...]  # steps where the counter is inside [tmin, tmax]
    deadline: int | None  # first step where the counter exceeds tmax (forced if set)


def _edge_view(e: TfpgEdge, t_src: int, at: ActivationTrace, reset_on_disable: bool) -> _EdgeView:
    counters = [0]
    c = 0
    for s in range(t_src, at.length):
        enabled = e.modes is None or at.modes[s] in e.modes
        if enabled:
            c += 1
        elif reset_on_disable:
            c = 0
        counters.append(c)
    fire = []
    deadline = None
    for s in range(t_src, at.length):
        c_here = counters[s - t_src]
        if c_here >= e.tmin and (e.tmax is None or c_here <= e.tmax):
            fire.append(s)
        if e.tmax is not None and c_here > e.tmax and deadline is None:
            deadline = s
    return _EdgeView(e, t_src, tuple(counters), tuple(fire), deadline)


def _classify_blocked(view: _EdgeView, t: int) -> str:
    """Reason an edge cannot fire at step t: window passed, not yet reached,
    or not yet reached only because disabled modes paused the counter."""
    c = view.counters[t - view.t_src]
    if view.edge.tmax is not None and c > view.edge.tmax:
        return "too-late"
    raw = t - view.t_src
    if c < view.edge.tmin <= raw:
        return "mode-violation"
    return "too-early"


def admits(tfpg: Tfpg, at: ActivationTrace, reset_on_disable: bool = False) -> AdmitResult:
    """Yes iff some firing-delay assignment reproduces the activation trace."""
    unknown = set(at.modes) - set(tfpg.modes)
    if unknown:
        raise ValueError(f"activation trace uses unknown mode literals {sorted(unknown)}")
    violations: list[tuple[int, str, str]] = []  # (step, node, reason)

    for node in sorted(tfpg.discrepancies()):
        kind = tfpg.nodes[node]
        t_v = at.times.get(node)
        incoming = tfpg.incoming(node)
        views = {}
        for e in incoming:
            t_src = at.times.get(e.src)
            if t_src is not None:
                views[e] = _edge_view(e, t_src, at, reset_on_disable)

        if kind == "or":
            v = _check_or(node, t_v, incoming, views)
        else:
            v = _check_and(node, t_v, incoming, views)
        if v is not None:
            violations.append(v)

    if not violations:
        return AdmitResult(True)
    step, node, reason = min(violations, key=lambda x: (x[0], x[1]))
    return AdmitResult(False, node, reason, step)


def _check_or(node: str, t_v: int | None, incoming, views) -> tuple[int, str, str] | None:
    if t_v is None:
        # never activated: no pending edge may be forced to fire
        forced = [v for v in views.values() if v.deadline is not None]
        if forced:
            first = min(v.deadline for v in forced)
            return (first, node, "too-late")
        return None
    pending = [v for v in views.values() if v.t_src <= t_v]
    if not incoming or not pending:
        return (t_v, node, "missing-cause")
    # a cause must fire exactly at t_v
    if not any(t_v in v.fire_steps for v in pending):
        reasons = {_classify_blocked(v, t_v) for v in pending}
        for r in ("mode-violation", "too-early", "too-late"):
            if r in reasons:
                return (t_v, node, r)
    # no pending edge may have been forced to fire strictly before t_v
    for v in pending:
        can_defer = any(f >= t_v for f in v.fire_steps)
        if not can_defer and v.deadline is not None:
            return (t_v, node, "too-late")
    return None


def _check_and(node: str, t_v: int | None, incoming, views) -> tuple[int, str, str] | None:
    if t_v is None:
        # forced only when every source activated and every edge passed its deadline
        if incoming and len(views) == len(incoming) and all(v.deadline is not None for v in views.values()):
            return (max(v.deadline for v in views.values()), node, "too-late")
        return None
    if not incoming:
        return (t_v, node, "missing-cause")
    if len(views) != len(incoming) or any(v.t_src > t_v for v in views.values()):
        return (t_v, node, "and-incomplete")
    # every edge must have a firing opportunity at or before t_v
    for v in views.values():
        if not any(f <= t_v for f in v.fire_steps):
            return (t_v, node, _classify_blocked(v, t_v))
    # the latest firing lands exactly on t_v
    if not any(t_v in v.fire_steps for v in views.values()):
        return (t_v, node, "too-late")
    return None


# ---------------------------------------------------------------------------
# Reference semantics: explicit search over firing assignments

def admits_by_search(tfpg: Tfpg, at: ActivationTrace, reset_on_disable: bool = False) -> bool:
    """Exhaustive enumeration of per-edge firing steps (desk-scale only)."""
    unknown = set(at.modes) - set(tfpg.modes)
    if unknown:
        raise ValueError(f"activation trace uses unknown mode literals {sorted(unknown)}")
    for node in sorted(tfpg.discrepancies()):
        kind = tfpg.nodes[node]
        t_v = at.times.get(node)
        incoming = tfpg.incoming(node)
        views = []
        for e in incoming:
            t_src = at.times.get(e.src)
            if t_src is not None:
                views.append(_edge_view(e, t_src, at, reset_on_disable))
        if kind == "or" and t_v is not None:
            views = [v for v in views if v.t_src <= t_v]  # later edges are absorbed
        if not _node_consistent(kind, t_v, len(incoming), views):
            return False
    return True


def _node_consistent(kind: str, t_v: int | None, n_incoming: int, views) -> bool:
    options = []
    for v in views:
        opts: list[int | None] = list(v.fire_steps)
        if v.deadline is None:
            opts.append(None)
        options.append(opts)
    for combo in itertools.product(*options):
        fired = [f for f in combo if f is not None]
        if kind == "or":
            if t_v is None:
                ok = not fired
            else:
                ok = bool(views) and any(f == t_v for f in fired) and all(f >= t_v for f in fired)
        else:
            if t_v is None:
                ok = n_incoming == 0 or len(fired) < n_incoming
            else:
                ok = (n_incoming > 0 and len(views) == n_incoming
                      and len(fired) == n_incoming and max(fired) == t_v)
        if ok:
            return True
    return False
