"""Type checking and name resolution for parsed models."""

from __future__ import annotations

from dataclasses import dataclass, field

from mbsa.diagnostics import Diagnostic, InputError
from mbsa.sts.model import (
    BinOp,
    BoolConst,
    BoolType,
    EnumType,
    Expr,
    InSet,
    IntConst,
    IntRangeType,
    IntType,
    Ite,
    Name,
    Next,
    SymbolicModel,
    TypeSpec,
    UnOp,
    type_values,
)


class TypeError_(InputError):
    """Type or resolution problems; named with a trailing underscore to avoid
    shadowing the builtin."""


_BOOL = BoolType()
_INT = IntType()


def _is_int(ty) -> bool:
    return isinstance(ty, (IntType, IntRangeType))


def _compatible(a, b) -> bool:
    if isinstance(a, BoolType) and isinstance(b, BoolType):
        return True
    if _is_int(a) and _is_int(b):
        return True
    if isinstance(a, EnumType) and isinstance(b, EnumType):
        return a == b
    return False


@dataclass
class TypedModel:
    """A checked model plus the symbol information the engine needs."""

    model: SymbolicModel
    var_index: dict[str, int]
    var_types: tuple[TypeSpec, ...]
    domains: tuple[tuple, ...]
    defines: dict[str, Expr]
    enum_literals: dict[str, list[EnumType]] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.model.name

    def var_names(self) -> list[str]:
        return self.model.var_names()

    def check_expr(self, expr: Expr, *, allow_next: bool = False, filename: str = "<expr>") -> Expr:
        """Type-check an expression against this model's symbols; returns it annotated."""
        checker = _Checker(self, filename)
        checker.infer(expr, allow_next=allow_next)
        checker.raise_if_failed()
        return expr

    def expr_type(self, expr: Expr):
        return expr.ty


class _Checker:
    def __init__(self, tm: TypedModel, filename: str):
        self.tm = tm
        self.filename = filename
        self.diagnostics: list[Diagnostic] = []
        self._define_stack: list[str] = []
        self._define_types: dict[str, TypeSpec] = {}

    def error(self, node, message: str):
        self.diagnostics.append(Diagnostic(message, node.line, node.col, filename=self.filename))

    def raise_if_failed(self):
        if self.diagnostics:
            raise TypeError_(self.diagnostics)

    # -- resolution helpers -------------------------------------------------

    def define_type(self, name: str):
        if name in self._define_types:
            return self._define_types[name]
        if name in self._define_stack:
            cycle = " -> ".join(self._define_stack + [name])
            raise TypeError_(self.diagnostics + [Diagnostic(f"cyclic DEFINE: {cycle}", filename=self.filename)])
        self._define_stack.append(name)
        try:
            ty = self.infer(self.tm.defines[name], allow_next=False)
        finally:
            self._define_stack.pop()
        self._define_types[name] = ty
        return ty

    def name_type(self, node: Name, expected):
        name = node.name
        if name in self.tm.var_index:
            return self.tm.var_types[self.tm.var_index[name]]
        if name in self.tm.defines:
            return self.define_type(name)
        candidates = self.tm.enum_literals.get(name)
        if candidates:
            if isinstance(expected, EnumType) and expected in candidates:
                return expected
            if len(candidates) == 1:
                return candidates[0]
            self.error(node, f"ambiguous enumeration literal {name!r}; add context or rename")
            return candidates[0]
        self.error(node, f"unknown identifier {name!r}")
        return _BOOL

    # -- inference ----------------------------------------------------------

    def infer(self, e: Expr, *, allow_next: bool, expected=None):
        ty = self._infer(e, allow_next, expected)
        e.ty = ty
        return ty

    def _infer(self, e: Expr, allow_next: bool, expected):
        if isinstance(e, BoolConst):
            return _BOOL
        if isinstance(e, IntConst):
            return _INT
        if isinstance(e, Name):
            return self.name_type(e, expected)
        if isinstance(e, Next):
            if not allow_next:
                self.error(e, "next() is only allowed inside TRANS constraints")
            if e.name in self.tm.var_index:
                return self.tm.var_types[self.tm.var_index[e.name]]
            if e.name in self.tm.defines:
                self.error(e, f"next() applies to state variables, not DEFINE {e.name!r}")
                return self.define_type(e.name)
            self.error(e, f"unknown identifier {e.name!r}")
            return _BOOL
        if isinstance(e, UnOp):
            if e.op == "!":
                t = self.infer(e.operand, allow_next=allow_next)
                if not isinstance(t, BoolType):
                    self.error(e, f"operand of ! must be boolean, got {t}")
                return _BOOL
            t = self.infer(e.operand, allow_next=allow_next)
            if not _is_int(t):
                self.error(e, f"operand of unary - must be integer, got {t}")
            return _INT
        if isinstance(e, BinOp):
            return self._infer_binop(e, allow_next)
        if isinstance(e, Ite):
            ct = self.infer(e.cond, allow_next=allow_next)
            if not isinstance(ct, BoolType):
                self.error(e.cond, f"condition of ?: must be boolean, got {ct}")
            tt = self.infer(e.then, allow_next=allow_next, expected=expected)
            et = self.infer(e.other, allow_next=allow_next, expected=tt if tt else expected)
            if isinstance(tt, EnumType) or isinstance(et, EnumType):
                # retry literal branches against the resolved side
                if not _compatible(tt, et):
                    et = self.infer(e.other, allow_next=allow_next, expected=tt)
            if not _compatible(tt, et):
                self.error(e, f"branches of ?: have incompatible types {tt} and {et}")
                return tt
            if _is_int(tt):
                return tt if tt == et else _INT
            return tt
        if isinstance(e, InSet):
            ot = self.infer(e.operand, allow_next=allow_next)
            for m in e.members:
                if not isinstance(m, (Name, IntConst, BoolConst)):
                    self.error(m, "set members must be literal constants")
                    continue
                if isinstance(m, Name) and m.name in self.tm.var_index or isinstance(m, Name) and m.name in self.tm.defines:
                    self.error(m, f"set member {m.name!r} must be a literal constant, not a variable")
                    continue
                mt = self.infer(m, allow_next=False, expected=ot)
                if not _compatible(ot, mt):
                    self.error(m, f"set member type {mt} does not match operand type {ot}")
            return _BOOL
        raise AssertionError(f"unhandled node {e!r}")

    def _infer_binop(self, e: BinOp, allow_next: bool):
        op = e.op
        if op in ("&", "|", "->", "<->"):
            lt = self.infer(e.left, allow_next=allow_next)
            rt = self.infer(e.right, allow_next=allow_next)
            if not isinstance(lt, BoolType):
                self.error(e.left, f"operand of {op} must be boolean, got {lt}")
            if not isinstance(rt, BoolType):
                self.error(e.right, f"operand of {op} must be boolean, got {rt}")
            return _BOOL
        if op in ("=", "!="):
            # resolve enumeration literals against the other side; when the
            # left side is itself an ambiguous literal, type the right first
            if self._needs_context(e.left):
                rt = self.infer(e.right, allow_next=allow_next)
                lt = self.infer(e.left, allow_next=allow_next, expected=rt)
            else:
                lt = self.infer(e.left, allow_next=allow_next)
                rt = self.infer(e.right, allow_next=allow_next, expected=lt)
            if not _compatible(lt, rt):
                self.error(e, f"cannot compare {lt} with {rt}")
            return _BOOL
        if op in ("<", "<=", ">", ">="):
            lt = self.infer(e.left, allow_next=allow_next)
            rt = self.infer(e.right, allow_next=allow_next)
            if not _is_int(lt):
                self.error(e.left, f"operand of {op} must be integer, got {lt}")
            if not _is_int(rt):
                self.error(e.right, f"operand of {op} must be integer, got {rt}")
            return _BOOL
        if op in ("+", "-"):
            lt = self.infer(e.left, allow_next=allow_next)
            rt = self.infer(e.right, allow_next=allow_next)
            if not _is_int(lt):
                self.error(e.left, f"operand of {op} must be integer, got {lt}")
            if not _is_int(rt):
                self.error(e.right, f"operand of {op} must be integer, got {rt}")
            return _INT
        raise AssertionError(f"unhandled operator {op}")

    def _needs_context(self, e: Expr) -> bool:
        """An enumeration literal shared by several types resolves only
        against an expected type."""
        if isinstance(e, Name) and e.name not in self.tm.var_index and e.name not in self.tm.defines:
            cands = self.tm.enum_literals.get(e.name)
            return cands is not None and len(cands) > 1
        return False


def type_check(model: SymbolicModel, filename: str = "<input>") -> TypedModel:
    """Check a parsed model; returns a :class:`TypedModel` or raises TypeError_.

    Verifies name resolution, expression typing, DEFINE acyclicity, and the
    placement rule that ``next()`` appears only inside TRANS.
    """
    diagnostics: list[Diagnostic] = []
    var_index: dict[str, int] = {}
    var_types: list[TypeSpec] = []
    for i, (name, ty) in enumerate(model.variables):
        var_index[name] = i
        var_types.append(ty)

    defines = dict(model.defines)
    enum_literals: dict[str, list[EnumType]] = {}
    for _, ty in model.variables:
        if isinstance(ty, EnumType):
            for lit in ty.literals:
                owners = enum_literals.setdefault(lit, [])
                if ty not in owners:
                    owners.append(ty)
    for lit in enum_literals:
        if lit in var_index or lit in defines:
            diagnostics.append(Diagnostic(
                f"enumeration literal {lit!r} clashes with a declared name", filename=filename))
    if diagnostics:
        raise TypeError_(diagnostics)

    tm = TypedModel(
        model=model,
        var_index=var_index,
        var_types=tuple(var_types),
        domains=tuple(type_values(t) for t in var_types),
        defines=defines,
        enum_literals=enum_literals,
    )

    checker = _Checker(tm, filename)
    for name in defines:
        checker.define_type(name)
    for e in model.init:
        t = checker.infer(e, allow_next=False)
        if not isinstance(t, BoolType):
            checker.error(e, f"INIT constraint must be boolean, got {t}")
    for e in model.invar:
        t = checker.infer(e, allow_next=False)
        if not isinstance(t, BoolType):
            checker.error(e, f"INVAR constraint must be boolean, got {t}")
    for e in model.trans:
        t = checker.infer(e, allow_next=True)
        if not isinstance(t, BoolType):
            checker.error(e, f"TRANS constraint must be boolean, got {t}")
    checker.raise_if_failed()
    return tm
