"""Syntactic duality: numbered values against streams, producers against
consumers, call-by-value against call-by-name.

The transformation swaps terms with coterms node by node: numbered
constructors with stream destructors, pairs with case splits, injections
with projections, mu with comu, the corecursor with the generalized
recursor.  Variables swap with covariables through a pairing context;
binders pair a name with itself, which is always safe because the two
namespaces never mix.  Plain-Nat constructors and functions sit outside
the dualizable fragment.

Nat itself is kept as a self-dual leaf type: the dualizable type grammar
has no base case of its own, so payload and seed types bottom out at Nat.
"""

from __future__ import annotations

from dataclasses import dataclass, field

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
)
from .machine import RuleTag
from .typechecker import TypeEnv


class NotDualizable(Exception):
    def __init__(self, what: str):
        super().__init__(what)
        self.what = what


def dual_strategy(s: Strategy) -> Strategy:
    return CBN if s is CBV else CBV


_RULE_PAIRS = [
    (RuleTag.MU, RuleTag.MU_TILDE),
    (RuleTag.BETA_NUM_ZERO, RuleTag.BETA_HEAD),
    (RuleTag.BETA_NUM_SUCC, RuleTag.BETA_TAIL),
    (RuleTag.BETA_FST, RuleTag.BETA_INL),
    (RuleTag.BETA_SND, RuleTag.BETA_INR),
]
_RULE_DUAL = {a: b for a, b in _RULE_PAIRS} | {b: a for a, b in _RULE_PAIRS}


def dual_rule(tag: RuleTag) -> RuleTag:
    try:
        return _RULE_DUAL[tag]
    except KeyError:
        raise NotDualizable(f"rule {tag.value} has no dual") from None


def dual_type(t: TypeExpr | None) -> TypeExpr | None:
    if t is None:
        return None
    match t:
        case Nat():
            return t
        case Numbered(payload):
            return Stream(dual_type(payload))
        case Stream(elem):
            return Numbered(dual_type(elem))
        case Prod(l, r):
            return Sum(dual_type(l), dual_type(r))
        case Sum(l, r):
            return Prod(dual_type(l), dual_type(r))
        case Fn():
            raise NotDualizable("function types have no dual")
    raise NotDualizable(f"type {t!r} has no dual")


@dataclass(frozen=True)
class DualityContext:
    """Bijective pairing of variables with covariables for free names.

    Bound names pair with themselves; the pairing for free names defaults
    to the identity and may be overridden entry by entry.
    """

    var_to_covar: dict[str, str] = field(default_factory=dict)
    covar_to_var: dict[str, str] = field(default_factory=dict)

    def pair(self, var: str, covar: str) -> "DualityContext":
        v2c = dict(self.var_to_covar)
        c2v = dict(self.covar_to_var)
        v2c[var] = covar
        c2v[covar] = var
        return DualityContext(v2c, c2v)

    def covar_of(self, var: str) -> str:
        return self.var_to_covar.get(var, var)

    def var_of(self, covar: str) -> str:
        return self.covar_to_var.get(covar, covar)


EMPTY_CTX = DualityContext()


def dual_term(v: Term, ctx: DualityContext = EMPTY_CTX) -> CoTerm:
    """The coterm mirroring a term, swapping constructors for destructors."""

    match v:
        case Var(name):
            return CoVar(ctx.covar_of(name))
        case Mu(a, body, annot):
            return MuTilde(a, dual_command(body, ctx.pair(a, a)), dual_type(annot))
        case NumZero(arg):
            return Head(dual_term(arg, ctx))
        case NumSucc(arg):
            return Tail(dual_term(arg, ctx))
        case Pair(l, r):
            return SumCase(dual_term(l, ctx), dual_term(r, ctx))
        case InL(arg, other):
            return Fst(dual_term(arg, ctx), dual_type(other))
        case InR(arg, other):
            return Snd(dual_term(arg, ctx), dual_type(other))
        case CoRec(ha, he, ta, tg, te, seed, ea, sa):
            return RecNum(
                payload_var=ha,
                zero_body=dual_coterm(he, ctx.pair(ha, ha)),
                pred_var=ta,
                result_var=tg,
                succ_body=dual_coterm(te, ctx.pair(ta, ta).pair(tg, tg)),
                ret=dual_term(seed, ctx),
                payload_annot=dual_type(ea),
                annot=dual_type(sa),
            )
        case Zero() | Succ():
            raise NotDualizable("plain number constructors have no dual")
        case Lam():
            raise NotDualizable("functions have no dual")
    raise NotDualizable(f"term {type(v).__name__} has no dual")


def dual_coterm(e: CoTerm, ctx: DualityContext = EMPTY_CTX) -> Term:
    """The term mirroring a coterm, swapping destructors for constructors."""

    match e:
        case CoVar(name):
            return Var(ctx.var_of(name))
        case MuTilde(x, body, annot):
            return Mu(x, dual_command(body, ctx.pair(x, x)), dual_type(annot))
        case Head(rest):
            return NumZero(dual_coterm(rest, ctx))
        case Tail(rest):
            return NumSucc(dual_coterm(rest, ctx))
        case SumCase(l, r):
            return Pair(dual_coterm(l, ctx), dual_coterm(r, ctx))
        case Fst(rest, other):
            return InL(dual_coterm(rest, ctx), dual_type(other))
        case Snd(rest, other):
            return InR(dual_coterm(rest, ctx), dual_type(other))
        case RecNum(p, zb, x, y, sb, ret, pa, annot):
            return CoRec(
                head_covar=p,
                head_body=dual_term(zb, ctx.pair(p, p)),
                tail_covar=x,
                tail_seed_covar=y,
                tail_body=dual_term(sb, ctx.pair(x, x).pair(y, y)),
                seed=dual_coterm(ret, ctx),
                elem_annot=dual_type(pa),
                seed_annot=dual_type(annot),
            )
        case RecNat():
            raise NotDualizable("the plain number recursor has no dual")
        case Call():
            raise NotDualizable("call stacks have no dual")
    raise NotDualizable(f"coterm {type(e).__name__} has no dual")


def dual_command(c: Command, ctx: DualityContext = EMPTY_CTX) -> Command:
    """Mirror a command: the dual consumer becomes the producer and vice versa."""

    return Command(dual_coterm(c.consumer, ctx), dual_term(c.producer, ctx))


def dual_env(env: TypeEnv, ctx: DualityContext = EMPTY_CTX) -> TypeEnv:
    """Environment for the dual command: x : A turns into x' at dual(A) on
    the covariable side, and dually."""

    return TypeEnv.make(
        vars={ctx.var_of(a): dual_type(t) for a, t in env.covars.items()},
        covars={ctx.covar_of(x): dual_type(t) for x, t in env.vars.items()},
    )
