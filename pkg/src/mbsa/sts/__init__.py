"""Finite-state synchronous transition systems: language, checker, engine."""

from mbsa.sts.model import (
    BoolType,
    EnumType,
    IntRangeType,
    Expr,
    BoolConst,
    IntConst,
    Name,
    Next,
    UnOp,
    BinOp,
    Ite,
    InSet,
    SymbolicModel,
)
from mbsa.sts.parse import parse_model, parse_expr_text, ParseError
from mbsa.sts.check import type_check, TypedModel, TypeError_
from mbsa.sts.engine import initial_states, successors, reach, Trace, replay_ok
from mbsa.sts.pretty import print_model, print_expr

__all__ = [
    "BoolType",
    "EnumType",
    "IntRangeType",
    "Expr",
    "BoolConst",
    "IntConst",
    "Name",
    "Next",
    "UnOp",
    "BinOp",
    "Ite",
    "InSet",
    "SymbolicModel",
    "parse_model",
    "parse_expr_text",
    "ParseError",
    "type_check",
    "TypedModel",
    "TypeError_",
    "initial_states",
    "successors",
    "reach",
    "Trace",
    "replay_ok",
    "print_model",
    "print_expr",
]
