"""(Dynamic) fault trees: construction from cut sets, exact and symbolic
probability evaluation, script emission hooks, and export formats.

Probability semantics is the mission model: every basic event is a Bernoulli
indicator, independent except for common cause groups, which are handled by
conditioning on each group's occurrence (members are forced when the group
fires, and keep their independent spontaneous probability otherwise).  Gate
probabilities are exact (Shannon expansion over events); PAND evaluates as
AND, since the mission model has no time distribution over orderings --
ordering affects tree structure only, never node probabilities.  The
rare-event sum is available separately as a reference value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from xml.etree import ElementTree as ET

from mbsa.analysis import CutSequence, CutSetResult
from mbsa.diagnostics import MbsaError
from mbsa.probability import PBuilder, ProbabilityExpr, prob_str


class FaultTreeError(MbsaError):
    pass


@dataclass
class BasicEvent:
    event: str
    probability: Fraction | None = None
    label: str = ""


@dataclass
class Gate:
    kind: str  # "and" | "or" | "pand"
    children: tuple[str, ...]
    label: str = ""


@dataclass
class FaultTree:
    """Rooted gate DAG; basic events are shared by name across gates."""

    root: str
    nodes: dict[str, BasicEvent | Gate]

    def basic_events(self) -> dict[str, BasicEvent]:
        return {i: n for i, n in self.nodes.items() if isinstance(n, BasicEvent)}

    def gates(self) -> dict[str, Gate]:
        return {i: n for i, n in self.nodes.items() if isinstance(n, Gate)}


@dataclass
class ProbabilityAssignment:
    """Per-event probabilities plus the dependency groups that break independence.

    Group objects need ``id``, ``members`` and ``probability`` attributes (the
    cca module's CommonCauseSpec qualifies).
    """

    probabilities: dict[str, Fraction]
    dependency_groups: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Construction

def build_fault_tree(result: CutSetResult, sequences: list[CutSequence] | None = None,
                     tle_label: str = "TLE", probabilities: dict[str, Fraction] | None = None) -> FaultTree:
    """Two-level tree: an OR root over one child per cut set.

    Size-one cut sets contribute their basic event directly.  Larger cut
    sets contribute an AND gate, unless cut sequences show that not every
    order is admissible: a single admissible order becomes a PAND gate with
    children in that order, several (but not all) admissible orders become an
    OR of PANDs.
    """
    order_info: dict[frozenset, tuple[tuple[str, ...], ...]] = {}
    if sequences is not None:
        if {s.base for s in sequences} != set(result.mcs):
            raise FaultTreeError("cut sequences do not match the cut-set result (base sets differ)")
        order_info = {s.base: s.orders for s in sequences}

    nodes: dict[str, BasicEvent | Gate] = {}
    counter = 0

    def gate_id() -> str:
        nonlocal counter
        gid = f"#{counter}"
        counter += 1
        return gid

    root_id = gate_id()

    def event_node(name: str) -> str:
        if name not in nodes:
            prob = None if probabilities is None else probabilities.get(name)
            nodes[name] = BasicEvent(name, prob, label=name)
        return name

    children: list[str] = []
    for cut in result.mcs:
        if not cut:
            continue  # nominal-reachability warning case: no basic cause
        members = sorted(cut)
        if len(members) == 1:
            children.append(event_node(members[0]))
            continue
        orders = order_info.get(cut)
        label = "cut set {" + ", ".join(members) + "}"
        if orders is None or len(orders) == 0 or len(orders) == math.factorial(len(members)):
            gid = gate_id()
            nodes[gid] = Gate("and", tuple(event_node(m) for m in members), label)
            children.append(gid)
        elif len(orders) == 1:
            gid = gate_id()
            nodes[gid] = Gate("pand", tuple(event_node(m) for m in orders[0]),
                              "sequence " + " -> ".join(orders[0]))
            children.append(gid)
        else:
            pands = []
            for o in orders:
                gid = gate_id()
                nodes[gid] = Gate("pand", tuple(event_node(m) for m in o),
                                  "sequence " + " -> ".join(o))
                pands.append(gid)
            gid = gate_id()
            nodes[gid] = Gate("or", tuple(pands), label + " (admissible orders)")
            children.append(gid)
    nodes[root_id] = Gate("or", tuple(children), tle_label)
    return FaultTree(root_id, nodes)


# ---------------------------------------------------------------------------
# Exact probability

def _support(ft: FaultTree) -> dict[str, frozenset[str]]:
    memo: dict[str, frozenset[str]] = {}

    def go(nid: str) -> frozenset[str]:
        if nid in memo:
            return memo[nid]
        node = ft.nodes[nid]
        if isinstance(node, BasicEvent):
            out = frozenset((node.event,))
        else:
            out = frozenset().union(*(go(c) for c in node.children)) if node.children else frozenset()
        memo[nid] = out
        return out

    for nid in ft.nodes:
        go(nid)
    return memo


def _peval(ft: FaultTree, nid: str, assign: dict[str, bool]):
    """Three-valued evaluation under a partial event assignment."""
    node = ft.nodes[nid]
    if isinstance(node, BasicEvent):
        return assign.get(node.event)
    any_unknown = False
    if node.kind == "or":
        for c in node.children:
            v = _peval(ft, c, assign)
            if v is True:
                return True
            if v is None:
                any_unknown = True
        return None if any_unknown else False
    # and / pand (probability ignores ordering)
    for c in node.children:
        v = _peval(ft, c, assign)
        if v is False:
            return False
        if v is None:
            any_unknown = True
    return None if any_unknown else True


def _group_subsets(groups):
    """Deterministic conditioning branches: (weight-factors, occurred-set)."""
    ordered = sorted(groups, key=lambda g: g.id)
    for mask in range(1 << len(ordered)):
        occurred = [g for i, g in enumerate(ordered) if mask >> i & 1]
        yield ordered, occurred


def evaluate_probability(ft: FaultTree, pa: ProbabilityAssignment) -> dict[str, Fraction]:
    """Exact probability of every node (root value is P(TLE)).

    Raises FaultTreeError when a probability is missing or a dependency group
    references an event that is not a basic event of the tree.
    """
    events = ft.basic_events()
    groups = list(pa.dependency_groups)
    governed = {g.id for g in groups}
    for g in groups:
        for m in sorted(g.members):
            if m not in events:
                raise FaultTreeError(f"dependency group {g.id!r} references event {m!r} absent from the tree")
    probs: dict[str, Fraction] = {}
    for name in events:
        if name in governed:
            continue  # the group occurrence probability conditions this leaf
        if name not in pa.probabilities:
            raise FaultTreeError(f"missing probability for basic event {name!r}")
        p = Fraction(pa.probabilities[name])
        if not 0 <= p <= 1:
            raise FaultTreeError(f"probability of {name!r} outside [0,1]")
        probs[name] = p

    support = _support(ft)
    results: dict[str, Fraction] = {}

    def shannon(nid: str, assign: dict[str, bool], free: list[str]) -> Fraction:
        v = _peval(ft, nid, assign)
        if v is not None:
            return Fraction(1 if v else 0)
        for e in free:
            if e not in assign and e in support[nid]:
                p = probs[e]
                hi = shannon(nid, {**assign, e: True}, free)
                lo = shannon(nid, {**assign, e: False}, free)
                return p * hi + (1 - p) * lo
        raise AssertionError("undetermined node with no free support")

    for nid in ft.nodes:
        total = Fraction(0)
        for ordered, occurred in _group_subsets(groups):
            w = Fraction(1)
            for g in ordered:
                q = Fraction(g.probability)
                w *= q if g in occurred else 1 - q
            assign: dict[str, bool] = {}
            for g in ordered:
                assign[g.id] = g in occurred
                if g in occurred:
                    for m in g.members:
                        assign[m] = True
            free = sorted(n for n in events if n not in assign)
            total += w * shannon(nid, assign, free)
        results[nid] = total
    return results


def rare_event_approximation(ft: FaultTree, pa: ProbabilityAssignment) -> Fraction:
    """Sum of the root's child probabilities: the classical MCS upper-bound
    approximation, reported for reference only."""
    node_probs = evaluate_probability(ft, pa)
    root = ft.nodes[ft.root]
    return sum((node_probs[c] for c in root.children), Fraction(0))


# ---------------------------------------------------------------------------
# Symbolic probability

def symbolic_probability(ft: FaultTree, dependency_groups: list | None = None) -> ProbabilityExpr:
    """Closed-form root probability over symbols p_e, one per basic event and
    one per common cause group.

    Canonical form: conditioning over group symbols, then Shannon expansion
    over the remaining events in sorted order, hash-consed and constant-folded
    so no duplicate subterms remain.  Evaluating at any assignment equals
    :func:`evaluate_probability`'s root value exactly.
    """
    groups = sorted(dependency_groups or [], key=lambda g: g.id)
    governed = {g.id for g in groups}
    events = ft.basic_events()
    for g in groups:
        for m in sorted(g.members):
            if m not in events:
                raise FaultTreeError(f"dependency group {g.id!r} references event {m!r} absent from the tree")
    free_events = sorted(n for n in events if n not in governed)
    support = _support(ft)
    b = PBuilder()

    def shannon(assign: dict[str, bool], free: list[str]):
        v = _peval(ft, ft.root, assign)
        if v is not None:
            return b.const(1 if v else 0)
        for e in free:
            if e not in assign and e in support[ft.root]:
                hi = shannon({**assign, e: True}, free)
                lo = shannon({**assign, e: False}, free)
                return b.mix(b.sym(e), hi, lo)
        raise AssertionError("undetermined root with no free support")

    def condition(i: int, assign: dict[str, bool]):
        if i == len(groups):
            free = [e for e in free_events if e not in assign]
            return shannon(assign, free)
        g = groups[i]
        forced = {**assign, g.id: True}
        for m in g.members:
            forced[m] = True
        hi = condition(i + 1, forced)
        lo = condition(i + 1, {**assign, g.id: False})
        return b.mix(b.sym(g.id), hi, lo)

    root = condition(0, {})
    symbols = tuple(sorted(governed | set(free_events)))
    return ProbabilityExpr(root, symbols)


# ---------------------------------------------------------------------------
# Export / import

_KINDS = {"and", "or", "pand", "event"}


def _node_order(ft: FaultTree) -> list[str]:
    gates = [i for i in ft.nodes if isinstance(ft.nodes[i], Gate) and i != ft.root]
    events = sorted(i for i in ft.nodes if isinstance(ft.nodes[i], BasicEvent))
    return [ft.root] + sorted(gates, key=lambda g: int(g[1:]) if g[1:].isdigit() else 0) + events


def ft_to_tsv(ft: FaultTree, with_probabilities: bool = False) -> str:
    """One row per node: id, kind, children (space-joined) or probability, label."""
    rows = []
    for nid in _node_order(ft):
        node = ft.nodes[nid]
        if isinstance(node, Gate):
            rows.append(f"{nid}\t{node.kind}\t{' '.join(node.children)}\t{node.label}")
        else:
            p = ""
            if with_probabilities:
                if node.probability is None:
                    raise FaultTreeError(f"basic event {nid!r} has no probability to export")
                p = prob_str(node.probability)
            rows.append(f"{nid}\tevent\t{p}\t{node.label}")
    return "\n".join(rows) + "\n"


def ft_to_xml(ft: FaultTree, with_probabilities: bool = False) -> str:
    root = ET.Element("fault-tree")
    root.set("root", ft.root)
    for nid in _node_order(ft):
        node = ft.nodes[nid]
        if isinstance(node, Gate):
            el = ET.SubElement(root, "gate")
            el.set("id", nid)
            el.set("kind", node.kind)
            if node.label:
                el.set("label", node.label)
            for c in node.children:
                ET.SubElement(el, "child").set("ref", c)
        else:
            el = ET.SubElement(root, "basic-event")
            el.set("id", nid)
            if node.label:
                el.set("label", node.label)
            if with_probabilities:
                if node.probability is None:
                    raise FaultTreeError(f"basic event {nid!r} has no probability to export")
                el.set("probability", prob_str(node.probability))
            elif node.probability is not None:
                el.set("probability", prob_str(node.probability))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def ft_from_xml(text: str) -> FaultTree:
    root = ET.fromstring(text)
    if root.tag != "fault-tree":
        raise FaultTreeError(f"expected <fault-tree> document, found <{root.tag}>")
    nodes: dict[str, BasicEvent | Gate] = {}
    for el in root:
        if el.tag == "gate":
            kind = el.get("kind", "")
            if kind not in ("and", "or", "pand"):
                raise FaultTreeError(f"unknown gate kind {kind!r}")
            children = tuple(c.get("ref", "") for c in el if c.tag == "child")
            nodes[el.get("id", "")] = Gate(kind, children, el.get("label", ""))
        elif el.tag == "basic-event":
            p = el.get("probability")
            nodes[el.get("id", "")] = BasicEvent(
                el.get("id", ""), Fraction(p) if p is not None else None, el.get("label", ""))
        else:
            raise FaultTreeError(f"unexpected element <{el.tag}> in fault tree")
    tree = FaultTree(root.get("root", ""), nodes)
    if tree.root not in nodes:
        raise FaultTreeError(f"root node {tree.root!r} is not declared")
    for nid, node in nodes.items():
        if isinstance(node, Gate):
            for c in node.children:
                if c not in nodes:
                    raise FaultTreeError(f"gate {nid!r} references undeclared child {c!r}")
    return tree


_DOT_SHAPE = {"and": "box", "or": "ellipse", "pand": "trapezium"}


def ft_to_dot(ft: FaultTree, with_probabilities: bool = False) -> str:
    """Graphviz rendering; gate shapes are distinct per kind, events are circles."""
    lines = ["digraph fault_tree {", "  rankdir=TB;"]
    for nid in _node_order(ft):
        node = ft.nodes[nid]
        if isinstance(node, Gate):
            label = f"{node.kind.upper()}\\n{node.label}" if node.label else node.kind.upper()
            lines.append(f'  "{nid}" [shape={_DOT_SHAPE[node.kind]}, label="{label}"];')
        else:
            label = node.label or nid
            if with_probabilities and node.probability is not None:
                label += f"\\np={prob_str(node.probability)}"
            lines.append(f'  "{nid}" [shape=circle, label="{label}"];')
    for nid in _node_order(ft):
        node = ft.nodes[nid]
        if isinstance(node, Gate):
            for pos, c in enumerate(node.children):
                attr = f' [label="{pos + 1}"]' if node.kind == "pand" else ""
                lines.append(f'  "{nid}" -> "{c}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_ft(ft: FaultTree, fmt: str, with_probabilities: bool = False) -> str:
    if fmt == "xml":
        return ft_to_xml(ft, with_probabilities)
    if fmt == "tsv":
        return ft_to_tsv(ft, with_probabilities)
    if fmt == "dot":
        return ft_to_dot(ft, with_probabilities)
    raise FaultTreeError(f"unknown fault-tree format {fmt!r} (expected xml, tsv, or dot)")
