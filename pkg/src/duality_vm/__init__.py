"""Abstract machine for primitive recursion on numbers and corecursion on
streams, uniform over call-by-value and call-by-name."""

from .kernel import (
    CBN,
    CBV,
    Call,
    Command,
    CoRec,
    CoTerm,
    CoVar,
    Fn,
    Fst,
    Head,
    InL,
    InR,
    Lam,
    Mu,
    MuTilde,
    Nat,
    Numbered,
    NumSucc,
    NumZero,
    Pair,
    Prod,
    RecNat,
    RecNum,
    Snd,
    Strategy,
    Stream,
    Succ,
    Sum,
    SumCase,
    Tail,
    Term,
    TypeExpr,
    Var,
    Zero,
    alpha_eq,
    as_numeral,
    fresh_name,
    is_covalue,
    is_value,
    numeral,
    pretty,
    subst,
    subst_covar,
    subst_var,
    type_str,
    well_formed,
)
from .machine import (
    DEFAULT_FUEL,
    RuleTag,
    RunStats,
    force_numeral,
    observe_stream,
    run,
    step,
)
from .typechecker import TypeEnv, TypeCheckError, check_command, elaborate_command, infer_coterm, infer_term

__all__ = [name for name in dir() if not name.startswith("_")]
