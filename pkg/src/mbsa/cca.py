"""Common cause events: definition language, model weaving, dependency groups.

A common cause is a latched event that occurs nondeterministically at most
once per mission and triggers its member faults, either the same step
(simultaneous) or within per-member step windows (cascading, forced by each
window's upper bound).  Members keep their independent spontaneous
occurrence; an earlier spontaneous occurrence simply stands.

Weaving also rewrites each member's suppression predicate so that restricted
analyses ("only the events in C may occur") still admit occurrences the
common cause forces: a member outside C may become faulty exactly when a
common cause inside C triggers it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from mbsa.diagnostics import Diagnostic, InputError
from mbsa.faults import EventInfo, ExtendedModel
from mbsa.sts.check import TypeError_, type_check
from mbsa.sts.model import (
    BinOp,
    BoolType,
    IntConst,
    IntRangeType,
    Ite,
    Name,
    Next,
    SymbolicModel,
    UnOp,
)
from mbsa.sts.parse import TokenStream, tokenize


class CcaError(InputError):
    pass


@dataclass(frozen=True)
class Simultaneous:
    pass


@dataclass(frozen=True)
class Cascading:
    windows: tuple[tuple[str, int, int], ...]  # (member, lo, hi), sorted by member

    def window(self, member: str) -> tuple[int, int]:
        for m, lo, hi in self.windows:
            if m == member:
                return lo, hi
        return 0, 0  # members without an explicit window trigger immediately


@dataclass(frozen=True)
class CommonCauseSpec:
    id: str
    members: frozenset[str]
    pattern: Simultaneous | Cascading
    probability: Fraction


def parse_cca(text: str, filename: str = "<cca>") -> list[CommonCauseSpec]:
    """Parse common cause definitions.

    Grammar::

        cc ID : members { EVENT , ... } , pattern simultaneous , prob NUMBER ;
        cc ID : members { EVENT , ... } ,
                pattern cascading ( EVENT : [LO,HI] , ... ) , prob NUMBER ;

    Member resolution against an extended model is deferred to
    :func:`apply_cca`.
    """
    ts = TokenStream(tokenize(text, filename), filename)
    out: list[CommonCauseSpec] = []
    seen: set[str] = set()
    while ts.cur.kind != "eof":
        if not (ts.cur.kind == "ident" and ts.cur.text == "cc"):
            ts.fail(f"expected 'cc', found {ts.cur.text!r}")
        ts.advance()
        id_tok = ts.expect_ident("common cause id")
        if id_tok.text in seen:
            raise CcaError([Diagnostic(f"duplicate common cause id {id_tok.text!r}",
                                       id_tok.line, id_tok.col, filename=filename)])
        seen.add(id_tok.text)
        ts.expect(":")
        _word(ts, "members")
        ts.expect("{")
        members = [ts.expect_ident("member event").text]
        while ts.accept(","):
            members.append(ts.expect_ident("member event").text)
        ts.expect("}")
        if len(set(members)) != len(members):
            raise CcaError([Diagnostic(f"duplicate member in common cause {id_tok.text!r}",
                                       id_tok.line, id_tok.col, filename=filename)])
        if len(members) < 2:
            raise CcaError([Diagnostic(f"common cause {id_tok.text!r} needs at least 2 members",
                                       id_tok.line, id_tok.col, filename=filename)])
        ts.expect(",")
        _word(ts, "pattern")
        if ts.cur.kind == "ident" and ts.cur.text == "simultaneous":
            ts.advance()
            pattern: Simultaneous | Cascading = Simultaneous()
        elif ts.cur.kind == "ident" and ts.cur.text == "cascading":
            ts.advance()
            ts.expect("(")
            windows = []
            if not ts.at(")"):
                while True:
                    m = ts.expect_ident("member event")
                    ts.expect(":")
                    ts.expect("[")
                    lo_tok = ts.cur
                    if lo_tok.kind != "num":
                        ts.fail("expected window lower bound")
                    lo = int(ts.advance().text)
                    ts.expect(",")
                    hi_tok = ts.cur
                    if hi_tok.kind != "num":
                        ts.fail("expected window upper bound")
                    hi = int(ts.advance().text)
                    ts.expect("]")
                    if lo > hi:
                        raise CcaError([Diagnostic(f"window [{lo},{hi}] has lo > hi",
                                                   hi_tok.line, hi_tok.col, filename=filename)])
                    if m.text not in members:
                        raise CcaError([Diagnostic(f"window names non-member {m.text!r}",
                                                   m.line, m.col, filename=filename)])
                    windows.append((m.text, lo, hi))
                    if not ts.accept(","):
                        break
            ts.expect(")")
            pattern = Cascading(tuple(sorted(windows)))
        else:
            ts.fail(f"expected 'simultaneous' or 'cascading', found {ts.cur.text!r}")
        ts.expect(",")
        _word(ts, "prob")
        p_tok = ts.cur
        if p_tok.kind not in ("num", "real"):
            ts.fail(f"expected probability literal, found {p_tok.text!r}")
        ts.advance()
        prob = Fraction(p_tok.text)
        if not (0 <= prob <= 1):
            raise CcaError([Diagnostic(f"probability {p_tok.text} outside [0,1]",
                                       p_tok.line, p_tok.col, filename=filename)])
        ts.expect(";")
        out.append(CommonCauseSpec(id_tok.text, frozenset(members), pattern, prob))
    return out


def _word(ts: TokenStream, word: str):
    if not (ts.cur.kind == "ident" and ts.cur.text == word):
        ts.fail(f"expected {word!r}, found {ts.cur.text!r}")
    ts.advance()


# ---------------------------------------------------------------------------
# Weaving

def apply_cca(xm: ExtendedModel, specs: list[CommonCauseSpec]) -> ExtendedModel:
    """Weave common cause events into an extended model.

    Per spec: a boolean latch variable occurs nondeterministically at most
    once and is registered as a basic event; simultaneous members turn faulty
    the same step the latch rises; cascading members turn faulty within their
    window after the latch rises (forced by the upper bound).  Overlapping
    member sets are rejected: their composition is undefined.
    """
    if not specs:
        return xm
    governed: dict[str, str] = {}
    ids: set[str] = set()
    for spec in specs:
        if spec.id in xm.events or spec.id in ids:
            raise CcaError([Diagnostic(f"common cause id {spec.id!r} clashes with a registered event")])
        ids.add(spec.id)
        for m in sorted(spec.members):
            if m not in xm.events:
                raise CcaError([Diagnostic(f"common cause {spec.id!r} references unknown event {m!r}")])
            if xm.events[m].mode_var is None:
                raise CcaError([Diagnostic(f"common cause member {m!r} is not a fault event")])
            if m in governed:
                raise CcaError([Diagnostic(
                    f"event {m!r} is governed by both {governed[m]!r} and {spec.id!r}; "
                    "overlapping common causes are rejected")])
            governed[m] = spec.id

    model = xm.model
    variables = list(model.variables)
    defines = list(model.defines)
    init = list(model.init)
    trans = list(model.trans)
    invar = list(model.invar)
    events: dict[str, EventInfo] = dict(xm.events)

    for spec in specs:
        cc = f"cc#{spec.id}"
        variables.append((cc, BoolType()))
        init.append(UnOp("!", Name(cc)))
        trans.append(BinOp("->", Name(cc), Next(cc)))  # latched: at most one occurrence

        if isinstance(spec.pattern, Simultaneous):
            rising = BinOp("&", UnOp("!", Name(cc)), Next(cc))
            for m in sorted(spec.members):
                mode_var = events[m].mode_var
                trans.append(BinOp("->", rising, BinOp("=", Next(mode_var), Name("faulty"))))
                allowance = Name(cc)
                events[m] = replace(events[m], suppression=BinOp("|", events[m].suppression, allowance))
        else:
            cap = max((hi for _, _, hi in spec.pattern.windows), default=0) + 1
            age = f"age#{spec.id}"
            variables.append((age, IntRangeType(0, cap)))
            init.append(BinOp("=", Name(age), IntConst(0)))
            inc = BinOp("+", Name(age), IntConst(1))
            trans.append(BinOp(
                "=", Next(age),
                Ite(Next(cc),
                    Ite(Name(cc), Ite(BinOp(">", inc, IntConst(cap)), IntConst(cap), inc), IntConst(0)),
                    IntConst(0))))
            for m in sorted(spec.members):
                lo, hi = spec.pattern.window(m)
                mode_var = events[m].mode_var
                # forced by the window's upper bound
                invar.append(BinOp(
                    "->", BinOp("&", Name(cc), BinOp("=", Name(age), IntConst(hi))),
                    BinOp("=", Name(mode_var), Name("faulty"))))
                allowance = BinOp("&", Name(cc), BinOp(">=", Name(age), IntConst(lo)))
                events[m] = replace(events[m], suppression=BinOp("|", events[m].suppression, allowance))

        events[spec.id] = EventInfo(
            name=spec.id,
            mode_var=cc,
            occurrence=Name(cc),
            probability=spec.probability,
            suppression=UnOp("!", Name(cc)),
        )

    woven = SymbolicModel(model.name, tuple(variables), tuple(defines),
                          tuple(init), tuple(trans), tuple(invar))
    try:
        typed = type_check(woven)
    except TypeError_ as exc:
        raise CcaError(exc.diagnostics)
    return ExtendedModel(typed, events)


def dependency_groups(specs: list[CommonCauseSpec]) -> list[CommonCauseSpec]:
    """The dependency groups probability evaluation conditions on.

    Evaluation sums over occurrence combinations of the groups: each branch
    weighs by the group probabilities, forces occurred groups' members to
    have occurred, and keeps members' spontaneous probabilities independent.
    """
    return list(specs)
