"""Type checker for the machine language.

Judgments: a term produces a type, a coterm consumes a type, and a command
is a well-formed cut of a producer against a consumer of the same type.
Checking is bottom-up inference with no unification; binder annotations on
``mu``/``comu``/``fun``/``corec`` supply the types inference cannot guess.
A lightweight checking mode lets an unannotated binder be pushed against a
type known from the other side of a cut, which is how commands produced by
machine steps stay checkable.

``elaborate_command`` returns the same command with every inferable
annotation filled in (recursor result types, corecursor seed types, binder
types), so that the small-step rules can propagate annotations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Mapping

from .kernel import (
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
    Stream,
    Succ,
    Sum,
    SumCase,
    Tail,
    Term,
    TypeExpr,
    Var,
    Zero,
    type_str,
)


class TypeCheckError(Exception):
    """A typing failure, pinned to a path into the checked node."""

    def __init__(
        self,
        kind: str,
        path: str,
        message: str,
        expected: TypeExpr | None = None,
        found: TypeExpr | None = None,
    ):
        self.kind = kind
        self.path = path
        self.expected = expected
        self.found = found
        self.message = message
        detail = message
        if expected is not None and found is not None:
            detail += f" (expected {type_str(expected)}, found {type_str(found)})"
        super().__init__(f"{path}: {detail}")


@dataclass(frozen=True)
class TypeEnv:
    """Variable and covariable typings; immutable, binds return extensions."""

    vars: Mapping[str, TypeExpr]
    covars: Mapping[str, TypeExpr]

    @staticmethod
    def make(vars: dict[str, TypeExpr] | None = None, covars: dict[str, TypeExpr] | None = None) -> "TypeEnv":
        vars = dict(vars or {})
        covars = dict(covars or {})
        both = set(vars) & set(covars)
        if both:
            raise ValueError(f"names bound as both variable and covariable: {sorted(both)}")
        return TypeEnv(MappingProxyType(vars), MappingProxyType(covars))

    def bind_var(self, name: str, t: TypeExpr) -> "TypeEnv":
        d = dict(self.vars)
        d[name] = t
        return TypeEnv(MappingProxyType(d), self.covars)

    def bind_covar(self, name: str, t: TypeExpr) -> "TypeEnv":
        d = dict(self.covars)
        d[name] = t
        return TypeEnv(self.vars, MappingProxyType(d))

    def lookup_var(self, name: str, path: str) -> TypeExpr:
        try:
            return self.vars[name]
        except KeyError:
            raise TypeCheckError("UnboundName", path, f"unbound variable {name!r}") from None

    def lookup_covar(self, name: str, path: str) -> TypeExpr:
        try:
            return self.covars[name]
        except KeyError:
            raise TypeCheckError("UnboundName", path, f"unbound covariable {name!r}") from None


EMPTY_ENV = TypeEnv.make()


def _mismatch(path: str, expected: TypeExpr, found: TypeExpr) -> TypeCheckError:
    return TypeCheckError("Mismatch", path, "type mismatch", expected=expected, found=found)


# ---------------------------------------------------------------------------
# Terms


def _infer_term(env: TypeEnv, t: Term, path: str) -> tuple[TypeExpr, Term]:
    match t:
        case Var(name):
            return env.lookup_var(name, path), t
        case Zero():
            return Nat(), t
        case Succ(arg):
            arg2 = _check_term(env, arg, Nat(), f"{path}.arg")
            return Nat(), t if arg2 is arg else Succ(arg2)
        case NumZero(arg):
            a, arg2 = _infer_term(env, arg, f"{path}.arg")
            return Numbered(a), t if arg2 is arg else NumZero(arg2)
        case NumSucc(arg):
            a, arg2 = _infer_term(env, arg, f"{path}.arg")
            if not isinstance(a, Numbered):
                raise _mismatch(f"{path}.arg", Numbered(a), a)
            return a, t if arg2 is arg else NumSucc(arg2)
        case Lam(x, body, annot):
            if annot is None:
                raise TypeCheckError(
                    "AnnotationRequired", path, "function binder needs a type annotation"
                )
            b, body2 = _infer_term(env.bind_var(x, annot), body, f"{path}.body")
            return Fn(annot, b), _re(t, body=body2)
        case Mu(a, body, annot):
            if annot is None:
                raise TypeCheckError("AnnotationRequired", path, "mu binder needs a type annotation")
            body2 = _check_command(env.bind_covar(a, annot), body, f"{path}.body")
            return annot, _re(t, body=body2)
        case Pair(l, r):
            lt, l2 = _infer_term(env, l, f"{path}.left")
            rt, r2 = _infer_term(env, r, f"{path}.right")
            return Prod(lt, rt), _re(t, left=l2, right=r2)
        case InL(arg, other):
            if other is None:
                raise TypeCheckError(
                    "AnnotationRequired", path, "left injection needs the right component type"
                )
            a, arg2 = _infer_term(env, arg, f"{path}.arg")
            return Sum(a, other), _re(t, arg=arg2)
        case InR(arg, other):
            if other is None:
                raise TypeCheckError(
                    "AnnotationRequired", path, "right injection needs the left component type"
                )
            a, arg2 = _infer_term(env, arg, f"{path}.arg")
            return Sum(other, a), _re(t, arg=arg2)
        case CoRec(elem_annot=ea):
            if ea is None:
                raise TypeCheckError(
                    "AnnotationRequired", path, "corecursor needs its element type annotation"
                )
            return _corec_at(env, t, ea, path)
    raise TypeCheckError("Mismatch", path, f"not a machine term: {type(t).__name__} (translate first)")


def _corec_at(env: TypeEnv, t: CoRec, elem: TypeExpr, path: str) -> tuple[TypeExpr, Term]:
    seed_t, seed2 = _infer_term(env, t.seed, f"{path}.seed")
    head2 = _check_coterm(
        env.bind_covar(t.head_covar, elem), t.head_body, seed_t, f"{path}.head"
    )
    tail_env = env.bind_covar(t.tail_covar, Stream(elem)).bind_covar(t.tail_seed_covar, seed_t)
    tail2 = _check_coterm(tail_env, t.tail_body, seed_t, f"{path}.tail")
    out = replace(t, head_body=head2, tail_body=tail2, seed=seed2, elem_annot=elem, seed_annot=seed_t)
    return Stream(elem), out


def _check_term(env: TypeEnv, t: Term, expected: TypeExpr, path: str) -> Term:
    match t:
        case Mu(a, body, annot):
            if annot is not None and annot != expected:
                raise _mismatch(path, expected, annot)
            body2 = _check_command(env.bind_covar(a, expected), body, f"{path}.body")
            return _re(t, body=body2, annot=expected)
        case Lam(x, body, annot):
            if not isinstance(expected, Fn):
                raise TypeCheckError(
                    "Mismatch", path, "function used at a non-function type", expected=expected
                )
            if annot is not None and annot != expected.arg:
                raise _mismatch(path, expected.arg, annot)
            body2 = _check_term(env.bind_var(x, expected.arg), body, expected.ret, f"{path}.body")
            return _re(t, body=body2, annot=expected.arg)
        case Succ(arg) if expected == Nat():
            arg2 = _check_term(env, arg, Nat(), f"{path}.arg")
            return t if arg2 is arg else Succ(arg2)
        case Pair(l, r) if isinstance(expected, Prod):
            l2 = _check_term(env, l, expected.left, f"{path}.left")
            r2 = _check_term(env, r, expected.right, f"{path}.right")
            return _re(t, left=l2, right=r2)
        case InL(arg, other) if isinstance(expected, Sum):
            if other is not None and other != expected.right:
                raise _mismatch(path, expected.right, other)
            arg2 = _check_term(env, arg, expected.left, f"{path}.arg")
            return _re(t, arg=arg2, other=expected.right)
        case InR(arg, other) if isinstance(expected, Sum):
            if other is not None and other != expected.left:
                raise _mismatch(path, expected.left, other)
            arg2 = _check_term(env, arg, expected.right, f"{path}.arg")
            return _re(t, arg=arg2, other=expected.left)
        case NumZero(arg) if isinstance(expected, Numbered):
            arg2 = _check_term(env, arg, expected.payload, f"{path}.arg")
            return t if arg2 is arg else NumZero(arg2)
        case NumSucc(arg) if isinstance(expected, Numbered):
            arg2 = _check_term(env, arg, expected, f"{path}.arg")
            return t if arg2 is arg else NumSucc(arg2)
        case CoRec(elem_annot=ea) if isinstance(expected, Stream):
            if ea is not None and ea != expected.elem:
                raise _mismatch(path, expected.elem, ea)
            ty, out = _corec_at(env, t, expected.elem, path)
            return out
        case _:
            found, t2 = _infer_term(env, t, path)
            if found != expected:
                raise _mismatch(path, expected, found)
            return t2


# ---------------------------------------------------------------------------
# Coterms


def _infer_coterm(env: TypeEnv, e: CoTerm, path: str) -> tuple[TypeExpr, CoTerm]:
    match e:
        case CoVar(name):
            return env.lookup_covar(name, path), e
        case MuTilde(x, body, annot):
            if annot is None:
                raise TypeCheckError("AnnotationRequired", path, "comu binder needs a type annotation")
            body2 = _check_command(env.bind_var(x, annot), body, f"{path}.body")
            return annot, _re(e, body=body2)
        case Call(arg, rest):
            a, arg2 = _infer_term(env, arg, f"{path}.arg")
            b, rest2 = _infer_coterm(env, rest, f"{path}.rest")
            return Fn(a, b), _re(e, arg=arg2, rest=rest2)
        case RecNat():
            return _recnat_at(env, e, None, path)
        case RecNum(payload_annot=pa):
            if pa is None:
                raise TypeCheckError(
                    "AnnotationRequired", path, "numbered recursor needs its payload type annotation"
                )
            return _recnum_at(env, e, pa, path)
        case Head(rest):
            a, rest2 = _infer_coterm(env, rest, f"{path}.rest")
            return Stream(a), _re(e, rest=rest2)
        case Tail(rest):
            st, rest2 = _infer_coterm(env, rest, f"{path}.rest")
            if not isinstance(st, Stream):
                raise _mismatch(f"{path}.rest", Stream(st), st)
            return st, _re(e, rest=rest2)
        case Fst(rest, other):
            if other is None:
                raise TypeCheckError(
                    "AnnotationRequired", path, "first projection needs the right component type"
                )
            a, rest2 = _infer_coterm(env, rest, f"{path}.rest")
            return Prod(a, other), _re(e, rest=rest2)
        case Snd(rest, other):
            if other is None:
                raise TypeCheckError(
                    "AnnotationRequired", path, "second projection needs the left component type"
                )
            a, rest2 = _infer_coterm(env, rest, f"{path}.rest")
            return Prod(other, a), _re(e, rest=rest2)
        case SumCase(l, r):
            lt, l2 = _infer_coterm(env, l, f"{path}.left")
            rt, r2 = _infer_coterm(env, r, f"{path}.right")
            return Sum(lt, rt), _re(e, left=l2, right=r2)
    raise TypeCheckError("Mismatch", path, f"not a machine coterm: {type(e).__name__} (translate first)")


def _recnat_at(env: TypeEnv, e: RecNat, result: TypeExpr | None, path: str) -> tuple[TypeExpr, CoTerm]:
    if result is None and e.annot is not None:
        result = e.annot
    if result is None:
        try:
            result, _ = _infer_term(env, e.zero_body, f"{path}.zero")
        except TypeCheckError as ex:
            if ex.kind != "AnnotationRequired":
                raise
            result, _ = _infer_coterm(env, e.ret, f"{path}.ret")
    zb2 = _check_term(env, e.zero_body, result, f"{path}.zero")
    senv = env.bind_var(e.pred_var, Nat()).bind_var(e.result_var, result)
    sb2 = _check_term(senv, e.succ_body, result, f"{path}.succ")
    ret2 = _check_coterm(env, e.ret, result, f"{path}.ret")
    return Nat(), replace(e, zero_body=zb2, succ_body=sb2, ret=ret2, annot=result)


def _recnum_at(env: TypeEnv, e: RecNum, payload: TypeExpr, path: str) -> tuple[TypeExpr, CoTerm]:
    result = e.annot
    if result is None:
        try:
            result, _ = _infer_term(env.bind_var(e.payload_var, payload), e.zero_body, f"{path}.zero")
        except TypeCheckError as ex:
            if ex.kind != "AnnotationRequired":
                raise
            result, _ = _infer_coterm(env, e.ret, f"{path}.ret")
    zb2 = _check_term(env.bind_var(e.payload_var, payload), e.zero_body, result, f"{path}.zero")
    senv = env.bind_var(e.pred_var, Numbered(payload)).bind_var(e.result_var, result)
    sb2 = _check_term(senv, e.succ_body, result, f"{path}.succ")
    ret2 = _check_coterm(env, e.ret, result, f"{path}.ret")
    return Numbered(payload), replace(e, zero_body=zb2, succ_body=sb2, ret=ret2, payload_annot=payload, annot=result)


def _check_coterm(env: TypeEnv, e: CoTerm, expected: TypeExpr, path: str) -> CoTerm:
    match e:
        case MuTilde(x, body, annot):
            if annot is not None and annot != expected:
                raise _mismatch(path, expected, annot)
            body2 = _check_command(env.bind_var(x, expected), body, f"{path}.body")
            return _re(e, body=body2, annot=expected)
        case Call(arg, rest) if isinstance(expected, Fn):
            arg2 = _check_term(env, arg, expected.arg, f"{path}.arg")
            rest2 = _check_coterm(env, rest, expected.ret, f"{path}.rest")
            return _re(e, arg=arg2, rest=rest2)
        case Head(rest) if isinstance(expected, Stream):
            rest2 = _check_coterm(env, rest, expected.elem, f"{path}.rest")
            return _re(e, rest=rest2)
        case Tail(rest) if isinstance(expected, Stream):
            rest2 = _check_coterm(env, rest, expected, f"{path}.rest")
            return _re(e, rest=rest2)
        case Fst(rest, other) if isinstance(expected, Prod):
            if other is not None and other != expected.right:
                raise _mismatch(path, expected.right, other)
            rest2 = _check_coterm(env, rest, expected.left, f"{path}.rest")
            return _re(e, rest=rest2, other=expected.right)
        case Snd(rest, other) if isinstance(expected, Prod):
            if other is not None and other != expected.left:
                raise _mismatch(path, expected.left, other)
            rest2 = _check_coterm(env, rest, expected.right, f"{path}.rest")
            return _re(e, rest=rest2, other=expected.left)
        case SumCase(l, r) if isinstance(expected, Sum):
            l2 = _check_coterm(env, l, expected.left, f"{path}.left")
            r2 = _check_coterm(env, r, expected.right, f"{path}.right")
            return _re(e, left=l2, right=r2)
        case RecNat() if expected == Nat():
            ty, e2 = _recnat_at(env, e, None, path)
            return e2
        case RecNum(payload_annot=pa) if isinstance(expected, Numbered):
            if pa is not None and pa != expected.payload:
                raise _mismatch(path, expected.payload, pa)
            ty, e2 = _recnum_at(env, e, expected.payload, path)
            return e2
        case _:
            found, e2 = _infer_coterm(env, e, path)
            if found != expected:
                raise _mismatch(path, expected, found)
            return e2


# ---------------------------------------------------------------------------
# Commands


def _check_command(env: TypeEnv, c: Command, path: str) -> Command:
    try:
        ty, v2 = _infer_term(env, c.producer, f"{path}.producer")
    except TypeCheckError as first:
        if first.kind != "AnnotationRequired":
            raise
        # Producer needs a type from the outside: infer the consumer instead.
        ty, e2 = _infer_coterm(env, c.consumer, f"{path}.consumer")
        v2 = _check_term(env, c.producer, ty, f"{path}.producer")
        return Command(v2, e2)
    consumer_path = f"{path}.consumer"
    try:
        e2 = _check_coterm(env, c.consumer, ty, consumer_path)
    except TypeCheckError as ex:
        if ex.kind == "Mismatch" and ex.path == consumer_path and ex.found is not None:
            raise TypeCheckError(
                "CutMismatch",
                path,
                "producer and consumer disagree",
                expected=ty,
                found=ex.found,
            ) from None
        raise
    return Command(v2, e2)


# ---------------------------------------------------------------------------
# Public API


def infer_term(env: TypeEnv, t: Term) -> TypeExpr:
    """The unique type t produces under env, or a TypeCheckError."""

    return _infer_term(env, t, "term")[0]


def infer_coterm(env: TypeEnv, e: CoTerm) -> TypeExpr:
    """The unique type e consumes under env, or a TypeCheckError."""

    return _infer_coterm(env, e, "coterm")[0]


def check_term(env: TypeEnv, t: Term, expected: TypeExpr) -> Term:
    return _check_term(env, t, expected, "term")


def check_coterm(env: TypeEnv, e: CoTerm, expected: TypeExpr) -> CoTerm:
    return _check_coterm(env, e, expected, "coterm")


def check_command(env: TypeEnv, c: Command) -> None:
    """Raise TypeCheckError unless both sides of the cut agree on a type."""

    _check_command(env, c, "command")


def elaborate_command(env: TypeEnv, c: Command) -> Command:
    """Check c and return it with all inferable annotations filled in."""

    return _check_command(env, c, "command")


def _re(node, **changes):
    """replace() that preserves identity when nothing changed."""

    if all(getattr(node, k) is v for k, v in changes.items()):
        return node
    return replace(node, **changes)
