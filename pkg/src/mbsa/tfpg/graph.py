"""TFPG structure and its three formats: editable text, XML, and DOT.

Failure nodes have no incoming edges; every edge targets a discrepancy and is
labeled with a propagation interval [tmin, tmax] (tmax may be infinite) and
the system modes in which the propagation counts time.  Writers use a fixed
ordering (nodes by id, edges by (src, dst)), so output is byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.etree import ElementTree as ET

from mbsa.diagnostics import Diagnostic, InputError
from mbsa.sts.parse import TokenStream, tokenize


class TfpgError(InputError):
    pass


def _err(message: str, line: int = 0, col: int = 0, filename: str = "<tfpg>") -> TfpgError:
    return TfpgError([Diagnostic(message, line, col, filename=filename)])


@dataclass(frozen=True)
class TfpgEdge:
    src: str
    dst: str
    tmin: int
    tmax: int | None  # None = unbounded
    modes: frozenset[str] | None  # None = all modes

    def modes_label(self) -> str:
        if self.modes is None:
            return "{*}"
        return "{" + ",".join(sorted(self.modes)) + "}"

    def bounds_label(self) -> str:
        hi = "inf" if self.tmax is None else str(self.tmax)
        return f"[{self.tmin},{hi}]"


@dataclass
class Tfpg:
    modes: tuple[str, ...]
    nodes: dict[str, str]  # id -> "failure" | "and" | "or"
    edges: tuple[TfpgEdge, ...]

    def failures(self) -> list[str]:
        return [n for n, k in self.nodes.items() if k == "failure"]

    def discrepancies(self) -> list[str]:
        return [n for n, k in self.nodes.items() if k != "failure"]

    def incoming(self, node: str) -> list[TfpgEdge]:
        return [e for e in self.edges if e.dst == node]

    def check(self, filename: str = "<tfpg>") -> None:
        """Structural validation; raises TfpgError on the first problem."""
        mode_set = set(self.modes)
        if len(mode_set) != len(self.modes):
            raise _err("duplicate mode literal", filename=filename)
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in self.nodes:
                    raise _err(f"edge references undeclared node {end!r}", filename=filename)
            if e.src == e.dst:
                raise _err(f"self-loop on {e.src!r} is not allowed", filename=filename)
            if self.nodes[e.dst] == "failure":
                raise _err(f"edge into failure node {e.dst!r} (failures have no incoming edges)",
                           filename=filename)
            if e.tmax is not None and e.tmin > e.tmax:
                raise _err(f"edge {e.src}->{e.dst} has tmin > tmax", filename=filename)
            if e.tmin < 0:
                raise _err(f"edge {e.src}->{e.dst} has negative tmin", filename=filename)
            if e.modes is not None:
                if not e.modes:
                    raise _err(f"edge {e.src}->{e.dst} has an empty mode set", filename=filename)
                unknown = e.modes - mode_set
                if unknown:
                    raise _err(f"edge {e.src}->{e.dst} uses unknown mode {sorted(unknown)[0]!r}",
                               filename=filename)


# ---------------------------------------------------------------------------
# Textual format

def parse_tfpg(text: str, filename: str = "<tfpg>") -> Tfpg:
    """Parse the editable text form::

        modes P, S1, S2;
        failure G1_Off;
        or G1_DEAD;
        and Sys_DEAD;
        edge G1_Off -> G1_DEAD [0,0] {*};
        edge G1_DEAD -> B1_LOW [0,inf] {P,S1};
    """
    ts = TokenStream(tokenize(text, filename), filename)
    modes: list[str] = []
    nodes: dict[str, str] = {}
    edges: list[TfpgEdge] = []
    while ts.cur.kind != "eof":
        t = ts.cur
        word = t.text if t.kind == "ident" else None
        if word == "modes":
            ts.advance()
            modes.append(ts.expect_ident("mode literal").text)
            while ts.accept(","):
                modes.append(ts.expect_ident("mode literal").text)
            ts.expect(";")
        elif word in ("failure", "or", "and"):
            kind = t.text
            ts.advance()
            node = ts.expect_ident("node id")
            if node.text in nodes:
                raise _err(f"duplicate node {node.text!r}", node.line, node.col, filename)
            nodes[node.text] = kind
            ts.expect(";")
        elif word == "edge":
            ts.advance()
            src = ts.expect_ident("source node").text
            ts.expect("->")
            dst = ts.expect_ident("destination node").text
            ts.expect("[")
            lo_tok = ts.cur
            if lo_tok.kind != "num":
                ts.fail("expected tmin")
            tmin = int(ts.advance().text)
            ts.expect(",")
            hi_tok = ts.cur
            if hi_tok.kind == "num":
                tmax: int | None = int(ts.advance().text)
            elif hi_tok.kind == "ident" and hi_tok.text == "inf":
                ts.advance()
                tmax = None
            else:
                ts.fail("expected tmax or 'inf'")
            ts.expect("]")
            ts.expect("{")
            if ts.accept("*"):
                edge_modes: frozenset[str] | None = None
            else:
                names = [ts.expect_ident("mode literal").text]
                while ts.accept(","):
                    names.append(ts.expect_ident("mode literal").text)
                edge_modes = frozenset(names)
            ts.expect("}")
            ts.expect(";")
            edges.append(TfpgEdge(src, dst, tmin, tmax, edge_modes))
        else:
            ts.fail(f"expected 'modes', 'failure', 'or', 'and', or 'edge', found {t.text!r}")
    g = Tfpg(tuple(modes), nodes, tuple(edges))
    g.check(filename)
    return g


def write_tfpg(g: Tfpg) -> str:
    """Canonical text: modes as declared, nodes by id, edges by (src, dst)."""
    lines = []
    if g.modes:
        lines.append("modes " + ", ".join(g.modes) + ";")
    for node in sorted(g.nodes):
        lines.append(f"{g.nodes[node]} {node};")
    for e in sorted(g.edges, key=lambda e: (e.src, e.dst, e.tmin, e.tmax is None, e.tmax or 0)):
        lines.append(f"edge {e.src} -> {e.dst} {e.bounds_label()} {e.modes_label()};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# XML format

def tfpg_to_xml(g: Tfpg) -> str:
    root = ET.Element("tfpg")
    modes_el = ET.SubElement(root, "modes")
    for m in g.modes:
        ET.SubElement(modes_el, "mode").set("name", m)
    nodes_el = ET.SubElement(root, "nodes")
    for node in sorted(g.nodes):
        kind = g.nodes[node]
        if kind == "failure":
            ET.SubElement(nodes_el, "failure").set("id", node)
        else:
            el = ET.SubElement(nodes_el, "discrepancy")
            el.set("id", node)
            el.set("semantics", kind)
    edges_el = ET.SubElement(root, "edges")
    for e in sorted(g.edges, key=lambda e: (e.src, e.dst, e.tmin, e.tmax is None, e.tmax or 0)):
        el = ET.SubElement(edges_el, "edge")
        el.set("src", e.src)
        el.set("dst", e.dst)
        el.set("tmin", str(e.tmin))
        el.set("tmax", "inf" if e.tmax is None else str(e.tmax))
        el.set("modes", "*" if e.modes is None else " ".join(sorted(e.modes)))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def tfpg_from_xml(text: str, filename: str = "<tfpg.xml>") -> Tfpg:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise _err(f"malformed XML: {exc}", filename=filename)
    if root.tag != "tfpg":
        raise _err(f"expected <tfpg> document, found <{root.tag}>", filename=filename)
    modes: list[str] = []
    for m in root.find("modes") if root.find("modes") is not None else []:
        modes.append(m.get("name", ""))
    nodes: dict[str, str] = {}
    nodes_el = root.find("nodes")
    for el in nodes_el if nodes_el is not None else []:
        nid = el.get("id", "")
        if el.tag == "failure":
            nodes[nid] = "failure"
        elif el.tag == "discrepancy":
            sem = el.get("semantics", "")
            if sem not in ("and", "or"):
                raise _err(f"discrepancy {nid!r} has unknown semantics {sem!r}", filename=filename)
            nodes[nid] = sem
        else:
            raise _err(f"unexpected node element <{el.tag}>", filename=filename)
    edges: list[TfpgEdge] = []
    edges_el = root.find("edges")
    for el in edges_el if edges_el is not None else []:
        tmax_text = el.get("tmax", "inf")
        modes_text = el.get("modes", "*")
        edges.append(TfpgEdge(
            el.get("src", ""),
            el.get("dst", ""),
            int(el.get("tmin", "0")),
            None if tmax_text == "inf" else int(tmax_text),
            None if modes_text == "*" else frozenset(modes_text.split()),
        ))
    g = Tfpg(tuple(modes), nodes, tuple(edges))
    g.check(filename)
    return g


# ---------------------------------------------------------------------------
# DOT

def tfpg_to_dot(g: Tfpg) -> str:
    """Graphviz view: failures dashed, AND discrepancies boxes, OR circles;
    edges labeled ``[lo,hi] {modes}``."""
    lines = ["digraph tfpg {", "  rankdir=LR;"]
    for node in sorted(g.nodes):
        kind = g.nodes[node]
        if kind == "failure":
            lines.append(f'  "{node}" [shape=box, style=dashed];')
        elif kind == "and":
            lines.append(f'  "{node}" [shape=box];')
        else:
            lines.append(f'  "{node}" [shape=circle];')
    for e in sorted(g.edges, key=lambda e: (e.src, e.dst, e.tmin, e.tmax is None, e.tmax or 0)):
        label = f"{e.bounds_label()} {e.modes_label()}"
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
