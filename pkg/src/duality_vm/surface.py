"""Front end: typed translation to the machine, plus the reference oracle.

The translator is type-directed: it checks the mixed front-end/machine
tree (lambda-calculus typing rules for the front-end constructs, the
sequent rules for embedded machine constructs) while compiling surface
applications, recursor expressions and numerals down to machine syntax.
Wherever the chosen strategy's grammar demands a value or covalue in some
position and the translated subterm is not one, the translator names the
offender with a mu/comu binding, the same trick the source-to-machine
translation uses for successor arguments and call-stack arguments.  The
output therefore always satisfies ``well_formed`` for the strategy it was
compiled for.

The reference evaluator is an independent small-step interpreter for the
pure lambda-calculus fragment (no machine constructs), used as the
differential oracle for translation correctness.  It deliberately shares
no machinery with the abstract machine, including substitution.

Also here: the case/iterator sugar, the recursor-as-iterator and
corecursor-as-coiterator encodings, and the standard prelude.
"""

from __future__ import annotations

import importlib.resources
from functools import lru_cache

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
    fresh_name,
    is_covalue,
    is_value,
    numeral,
    type_str,
)
from .parser import App, NumLit, Program, RecTerm, Ref, parse
from .typechecker import EMPTY_ENV, TypeCheckError, TypeEnv

__all__ = [
    "App",
    "NumLit",
    "Program",
    "RecTerm",
    "Ref",
    "Compiler",
    "translate",
    "infer",
    "reference_eval",
    "reference_trace",
    "surface_force_numeral",
    "desugar_case",
    "desugar_iter",
    "desugar_cocase",
    "desugar_coiter",
    "encode_rec_via_iter",
    "encode_corec_via_coiter",
    "prelude",
    "parse",
]


# ---------------------------------------------------------------------------
# The typed translator

_PROBE = "\x00probe"  # impossible name, used to discover a build context's free names


class Compiler:
    """Checks and compiles one program's definitions for one strategy."""

    def __init__(self, program: Program | None, strategy: Strategy):
        self.program = program or Program({}, None)
        self.s = strategy
        self._done: dict[str, tuple[TypeExpr, Term]] = {}
        self._busy: set[str] = set()

    # -- definitions

    def lookup_def(self, name: str, path: str) -> tuple[TypeExpr, Term]:
        if name in self._done:
            return self._done[name]
        if name not in self.program.defs:
            raise TypeCheckError("UnboundName", path, f"unknown definition {name!r}")
        if name in self._busy:
            raise TypeCheckError("Mismatch", path, f"definition cycle through {name!r}")
        self._busy.add(name)
        try:
            d = self.program.defs[name]
            body = self.term_check(EMPTY_ENV, d.body, d.declared, f"def {name}")
            if body.free_vars or body.free_covars:
                loose = sorted(body.free_vars | body.free_covars)
                raise TypeCheckError(
                    "UnboundName", f"def {name}", f"definition not closed; free: {loose}"
                )
            self._done[name] = (d.declared, body)
            return self._done[name]
        finally:
            self._busy.discard(name)

    def check_program(self) -> dict[str, TypeExpr]:
        """Check every definition (and main, if present); return def types."""

        out = {}
        for name in self.program.defs:
            out[name] = self.lookup_def(name, f"def {name}")[0]
        if self.program.main is not None:
            self.main()
        return out

    def main(self) -> tuple[TypeExpr | None, Command | Term]:
        """Translate main; commands get their one free covariable at Nat."""

        m = self.program.main
        if m is None:
            raise TypeCheckError("Mismatch", "main", "program has no main")
        if isinstance(m, Command):
            covars = sorted(m.free_covars)
            if len(covars) > 1:
                raise TypeCheckError(
                    "Mismatch", "main", f"main command must use one covariable, found {covars}"
                )
            env = EMPTY_ENV
            for a in covars:
                env = env.bind_covar(a, Nat())
            return None, self.command(env, m, "main")
        ty, t = self.term_infer(EMPTY_ENV, m, "main")
        return ty, t

    # -- fresh-name helpers

    def _fv(self, *nodes) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for n in nodes:
            out |= n.free_vars
        return out

    def _fcv(self, *nodes) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for n in nodes:
            out |= n.free_covars
        return out

    # -- staging: force a translated subtree into the strategy's grammar

    def _as_value(self, t: Term, ty: TypeExpr, build, out_ty: TypeExpr) -> Term:
        """build(value) with t named first when t is not a value.

        Produces ``mu a. < t | comu x. < build(x) | a > >`` in the staged
        case; the unstaged case is just build(t).  The fresh names avoid
        everything free in the built context, discovered with a probe.
        """

        if is_value(t, self.s):
            return build(t)
        probed = build(Var(_PROBE))
        x = fresh_name(t.free_vars | probed.free_vars, "x")
        a = fresh_name(t.free_covars | probed.free_covars, "a")
        inner = MuTilde(x, Command(build(Var(x)), CoVar(a)), ty)
        return Mu(a, Command(t, inner), out_ty)

    def _values(self, items: list[tuple[Term, TypeExpr]], build, out_ty: TypeExpr) -> Term:
        """n-ary _as_value, naming non-value items left to right."""

        def go(i: int, acc: list[Term]) -> Term:
            if i == len(items):
                return build(acc)
            t, ty = items[i]
            if is_value(t, self.s):
                return go(i + 1, acc + [t])
            return self._as_value(t, ty, lambda v: go(i + 1, acc + [v]), out_ty)

        return go(0, [])

    def _as_covalue(self, e: CoTerm, consumed: TypeExpr, build, built_consumes: TypeExpr) -> CoTerm:
        """build(covalue) with e named first when e is not a covalue.

        Produces ``comu x. < mu b. < x | build(b) > | e >`` in the staged
        case, where build(b) consumes ``built_consumes``.
        """

        if is_covalue(e, self.s):
            return build(e)
        probed = build(CoVar(_PROBE))
        b = fresh_name(e.free_covars | probed.free_covars, "b")
        x = fresh_name(e.free_vars | probed.free_vars, "x")
        inner = Mu(b, Command(Var(x), build(CoVar(b))), consumed)
        return MuTilde(x, Command(inner, e), built_consumes)

    # -- terms

    def term_infer(self, env: TypeEnv, t: Term, path: str) -> tuple[TypeExpr, Term]:
        match t:
            case NumLit(n):
                return Nat(), numeral(n)
            case Ref(name):
                return self.lookup_def(name, path)
            case Var(name):
                return env.lookup_var(name, path), t
            case Zero():
                return Nat(), t
            case Succ(arg):
                out = self.term_check(env, arg, Nat(), f"{path}.arg")
                return Nat(), self._as_value(out, Nat(), lambda v: Succ(v), Nat())
            case NumZero(arg):
                a, out = self.term_infer(env, arg, f"{path}.arg")
                return Numbered(a), self._as_value(out, a, lambda v: NumZero(v), Numbered(a))
            case NumSucc(arg):
                a, out = self.term_infer(env, arg, f"{path}.arg")
                if not isinstance(a, Numbered):
                    raise TypeCheckError(
                        "Mismatch", f"{path}.arg", "numbered successor of a non-Numbered value",
                        expected=Numbered(a), found=a,
                    )
                return a, self._as_value(out, a, lambda v: NumSucc(v), a)
            case Pair(l, r):
                lt, lo = self.term_infer(env, l, f"{path}.left")
                rt, ro = self.term_infer(env, r, f"{path}.right")
                ty = Prod(lt, rt)
                return ty, self._values([(lo, lt), (ro, rt)], lambda vs: Pair(vs[0], vs[1]), ty)
            case InL(arg, other):
                if other is None:
                    raise TypeCheckError(
                        "AnnotationRequired", path, "left injection needs the right component type"
                    )
                a, out = self.term_infer(env, arg, f"{path}.arg")
                ty = Sum(a, other)
                return ty, self._as_value(out, a, lambda v: InL(v, other), ty)
            case InR(arg, other):
                if other is None:
                    raise TypeCheckError(
                        "AnnotationRequired", path, "right injection needs the left component type"
                    )
                a, out = self.term_infer(env, arg, f"{path}.arg")
                ty = Sum(other, a)
                return ty, self._as_value(out, a, lambda v: InR(v, other), ty)
            case Lam(x, body, annot):
                if annot is None:
                    raise TypeCheckError(
                        "AnnotationRequired", path, "function binder needs a type annotation"
                    )
                bty, bout = self.term_infer(env.bind_var(x, annot), body, f"{path}.body")
                return Fn(annot, bty), Lam(x, bout, annot)
            case Mu(a, body, annot):
                if annot is None:
                    raise TypeCheckError("AnnotationRequired", path, "mu binder needs a type annotation")
                bout = self.command(env.bind_covar(a, annot), body, f"{path}.body")
                return annot, Mu(a, bout, annot)
            case CoRec(elem_annot=ea):
                if ea is None:
                    raise TypeCheckError(
                        "AnnotationRequired", path, "corecursor needs its element type annotation"
                    )
                return Stream(ea), self._corec(env, t, ea, path)
            case App(fn, arg):
                fty, fout = self.term_infer(env, fn, f"{path}.fn")
                if not isinstance(fty, Fn):
                    raise TypeCheckError(
                        "Mismatch", f"{path}.fn", "applied a non-function", found=fty
                    )
                aout = self.term_check(env, arg, fty.arg, f"{path}.arg")
                return fty.ret, self._app(fout, fty, aout)
            case RecTerm():
                zt, zout = self.term_infer(env, t.zero_body, f"{path}.zero")
                return zt, self._rec_term(env, t, zt, zout, path)
        raise TypeCheckError("Mismatch", path, f"unknown term form {type(t).__name__}")

    def term_check(self, env: TypeEnv, t: Term, expected: TypeExpr, path: str) -> Term:
        match t:
            case Mu(a, body, annot):
                if annot is not None and annot != expected:
                    raise TypeCheckError("Mismatch", path, "mu annotation disagrees",
                                         expected=expected, found=annot)
                bout = self.command(env.bind_covar(a, expected), body, f"{path}.body")
                return Mu(a, bout, expected)
            case Lam(x, body, annot):
                if not isinstance(expected, Fn):
                    raise TypeCheckError("Mismatch", path, "function used at a non-function type",
                                         expected=expected)
                if annot is not None and annot != expected.arg:
                    raise TypeCheckError("Mismatch", path, "binder annotation disagrees",
                                         expected=expected.arg, found=annot)
                bout = self.term_check(env.bind_var(x, expected.arg), body, expected.ret, f"{path}.body")
                return Lam(x, bout, expected.arg)
            case Succ(arg) if expected == Nat():
                out = self.term_check(env, arg, Nat(), f"{path}.arg")
                return self._as_value(out, Nat(), lambda v: Succ(v), Nat())
            case NumZero(arg) if isinstance(expected, Numbered):
                out = self.term_check(env, arg, expected.payload, f"{path}.arg")
                return self._as_value(out, expected.payload, lambda v: NumZero(v), expected)
            case NumSucc(arg) if isinstance(expected, Numbered):
                out = self.term_check(env, arg, expected, f"{path}.arg")
                return self._as_value(out, expected, lambda v: NumSucc(v), expected)
            case Pair(l, r) if isinstance(expected, Prod):
                lo = self.term_check(env, l, expected.left, f"{path}.left")
                ro = self.term_check(env, r, expected.right, f"{path}.right")
                return self._values(
                    [(lo, expected.left), (ro, expected.right)],
                    lambda vs: Pair(vs[0], vs[1]),
                    expected,
                )
            case InL(arg, other) if isinstance(expected, Sum):
                if other is not None and other != expected.right:
                    raise TypeCheckError("Mismatch", path, "injection annotation disagrees",
                                         expected=expected.right, found=other)
                out = self.term_check(env, arg, expected.left, f"{path}.arg")
                return self._as_value(out, expected.left, lambda v: InL(v, expected.right), expected)
            case InR(arg, other) if isinstance(expected, Sum):
                if other is not None and other != expected.left:
                    raise TypeCheckError("Mismatch", path, "injection annotation disagrees",
                                         expected=expected.left, found=other)
                out = self.term_check(env, arg, expected.right, f"{path}.arg")
                return self._as_value(out, expected.right, lambda v: InR(v, expected.left), expected)
            case CoRec(elem_annot=ea) if isinstance(expected, Stream):
                if ea is not None and ea != expected.elem:
                    raise TypeCheckError("Mismatch", path, "corecursor annotation disagrees",
                                         expected=expected.elem, found=ea)
                return self._corec(env, t, expected.elem, path)
            case RecTerm():
                zout = self.term_check(env, t.zero_body, expected, f"{path}.zero")
                return self._rec_term(env, t, expected, zout, path)
            case _:
                found, out = self.term_infer(env, t, path)
                if found != expected:
                    raise TypeCheckError("Mismatch", path, "type mismatch",
                                         expected=expected, found=found)
                return out

    def _app(self, fout: Term, fty: Fn, aout: Term) -> Term:
        """Compile an application: bind the function value, then the
        argument value, then cut the function against a call stack."""

        k = fresh_name(self._fcv(fout, aout), "a")
        f = fresh_name(self._fv(fout, aout), "f")
        x = fresh_name(self._fv(fout, aout) | {f}, "x")
        body = Command(
            fout,
            MuTilde(
                f,
                Command(aout, MuTilde(x, Command(Var(f), Call(Var(x), CoVar(k))), fty.arg)),
                fty,
            ),
        )
        return Mu(k, body, fty.ret)

    def _rec_term(self, env: TypeEnv, t: RecTerm, result: TypeExpr, zout: Term, path: str) -> Term:
        senv = env.bind_var(t.pred_var, Nat()).bind_var(t.result_var, result)
        sout = self.term_check(senv, t.succ_body, result, f"{path}.succ")
        mout = self.term_check(env, t.scrut, Nat(), f"{path}.scrut")
        k = fresh_name(self._fcv(zout, sout, mout), "a")
        rec = RecNat(zout, t.pred_var, t.result_var, sout, CoVar(k), annot=result)
        return Mu(k, Command(mout, rec), result)

    def _corec(self, env: TypeEnv, t: CoRec, elem: TypeExpr, path: str) -> Term:
        seed_ty, seed = self.term_infer(env, t.seed, f"{path}.seed")
        he = self.coterm_check(
            env.bind_covar(t.head_covar, elem), t.head_body, seed_ty, f"{path}.head"
        )
        tenv = env.bind_covar(t.tail_covar, Stream(elem)).bind_covar(t.tail_seed_covar, seed_ty)
        te = self.coterm_check(tenv, t.tail_body, seed_ty, f"{path}.tail")

        def build(v: Term) -> Term:
            return CoRec(t.head_covar, he, t.tail_covar, t.tail_seed_covar, te, v,
                         elem_annot=elem, seed_annot=seed_ty)

        return self._as_value(seed, seed_ty, build, Stream(elem))

    # -- coterms

    def coterm_infer(self, env: TypeEnv, e: CoTerm, path: str) -> tuple[TypeExpr, CoTerm]:
        match e:
            case CoVar(name):
                return env.lookup_covar(name, path), e
            case MuTilde(x, body, annot):
                if annot is None:
                    raise TypeCheckError("AnnotationRequired", path, "comu binder needs a type annotation")
                bout = self.command(env.bind_var(x, annot), body, f"{path}.body")
                return annot, MuTilde(x, bout, annot)
            case Call(arg, rest):
                aty, aout = self.term_infer(env, arg, f"{path}.arg")
                rty, rout = self.coterm_infer(env, rest, f"{path}.rest")
                return Fn(aty, rty), self._call(aout, aty, rout, rty)
            case Head(rest):
                a, rout = self.coterm_infer(env, rest, f"{path}.rest")
                out = self._as_covalue(rout, a, lambda E: Head(E), Stream(a))
                return Stream(a), out
            case Tail(rest):
                st, rout = self.coterm_infer(env, rest, f"{path}.rest")
                if not isinstance(st, Stream):
                    raise TypeCheckError("Mismatch", f"{path}.rest", "tail of a non-stream",
                                         expected=Stream(st), found=st)
                return st, self._as_covalue(rout, st, lambda E: Tail(E), st)
            case Fst(rest, other):
                if other is None:
                    raise TypeCheckError(
                        "AnnotationRequired", path, "first projection needs the right component type"
                    )
                a, rout = self.coterm_infer(env, rest, f"{path}.rest")
                ty = Prod(a, other)
                return ty, self._as_covalue(rout, a, lambda E: Fst(E, other), ty)
            case Snd(rest, other):
                if other is None:
                    raise TypeCheckError(
                        "AnnotationRequired", path, "second projection needs the left component type"
                    )
                a, rout = self.coterm_infer(env, rest, f"{path}.rest")
                ty = Prod(other, a)
                return ty, self._as_covalue(rout, a, lambda E: Snd(E, other), ty)
            case SumCase(l, r):
                lt, lo = self.coterm_infer(env, l, f"{path}.left")
                rt, ro = self.coterm_infer(env, r, f"{path}.right")
                return Sum(lt, rt), SumCase(lo, ro)
            case RecNat():
                return self._recnat(env, e, None, path)
            case RecNum(payload_annot=pa):
                if pa is None:
                    raise TypeCheckError(
                        "AnnotationRequired", path, "numbered recursor needs its payload type annotation"
                    )
                return self._recnum(env, e, pa, path)
        raise TypeCheckError("Mismatch", path, f"unknown coterm form {type(e).__name__}")

    def coterm_check(self, env: TypeEnv, e: CoTerm, expected: TypeExpr, path: str) -> CoTerm:
        match e:
            case MuTilde(x, body, annot):
                if annot is not None and annot != expected:
                    raise TypeCheckError("Mismatch", path, "comu annotation disagrees",
                                         expected=expected, found=annot)
                bout = self.command(env.bind_var(x, expected), body, f"{path}.body")
                return MuTilde(x, bout, expected)
            case Call(arg, rest) if isinstance(expected, Fn):
                aout = self.term_check(env, arg, expected.arg, f"{path}.arg")
                rout = self.coterm_check(env, rest, expected.ret, f"{path}.rest")
                return self._call(aout, expected.arg, rout, expected.ret)
            case Head(rest) if isinstance(expected, Stream):
                rout = self.coterm_check(env, rest, expected.elem, f"{path}.rest")
                return self._as_covalue(rout, expected.elem, lambda E: Head(E), expected)
            case Tail(rest) if isinstance(expected, Stream):
                rout = self.coterm_check(env, rest, expected, f"{path}.rest")
                return self._as_covalue(rout, expected, lambda E: Tail(E), expected)
            case Fst(rest, other) if isinstance(expected, Prod):
                if other is not None and other != expected.right:
                    raise TypeCheckError("Mismatch", path, "projection annotation disagrees",
                                         expected=expected.right, found=other)
                rout = self.coterm_check(env, rest, expected.left, f"{path}.rest")
                return self._as_covalue(rout, expected.left, lambda E: Fst(E, expected.right), expected)
            case Snd(rest, other) if isinstance(expected, Prod):
                if other is not None and other != expected.left:
                    raise TypeCheckError("Mismatch", path, "projection annotation disagrees",
                                         expected=expected.left, found=other)
                rout = self.coterm_check(env, rest, expected.right, f"{path}.rest")
                return self._as_covalue(rout, expected.right, lambda E: Snd(E, expected.left), expected)
            case SumCase(l, r) if isinstance(expected, Sum):
                lo = self.coterm_check(env, l, expected.left, f"{path}.left")
                ro = self.coterm_check(env, r, expected.right, f"{path}.right")
                return SumCase(lo, ro)
            case RecNat() if expected == Nat():
                return self._recnat(env, e, None, path)[1]
            case RecNum(payload_annot=pa) if isinstance(expected, Numbered):
                if pa is not None and pa != expected.payload:
                    raise TypeCheckError("Mismatch", path, "payload annotation disagrees",
                                         expected=expected.payload, found=pa)
                return self._recnum(env, e, expected.payload, path)[1]
            case _:
                found, out = self.coterm_infer(env, e, path)
                if found != expected:
                    raise TypeCheckError("Mismatch", path, "type mismatch",
                                         expected=expected, found=found)
                return out

    def _call(self, aout: Term, aty: TypeExpr, rout: CoTerm, rty: TypeExpr) -> CoTerm:
        fty = Fn(aty, rty)

        def with_tail(E: CoTerm) -> CoTerm:
            if is_value(aout, self.s):
                return Call(aout, E)
            # Name the function value, compute the argument, then call.
            f = fresh_name(self._fv(aout) | E.free_vars, "f")
            x = fresh_name(self._fv(aout) | E.free_vars | {f}, "x")
            inner = MuTilde(x, Command(Var(f), Call(Var(x), E)), aty)
            return MuTilde(f, Command(aout, inner), fty)

        return self._as_covalue(rout, rty, with_tail, fty)

    def _recnat(self, env: TypeEnv, e: RecNat, result: TypeExpr | None, path: str) -> tuple[TypeExpr, CoTerm]:
        if result is None and e.annot is not None:
            result = e.annot
        zout: Term | None = None
        if result is None:
            try:
                result, zout = self.term_infer(env, e.zero_body, f"{path}.zero")
            except TypeCheckError as ex:
                if ex.kind != "AnnotationRequired":
                    raise
                result, _ = self.coterm_infer(env, e.ret, f"{path}.ret")
                zout = None
        if zout is None:
            zout = self.term_check(env, e.zero_body, result, f"{path}.zero")
        senv = env.bind_var(e.pred_var, Nat()).bind_var(e.result_var, result)
        sout = self.term_check(senv, e.succ_body, result, f"{path}.succ")
        rout = self.coterm_check(env, e.ret, result, f"{path}.ret")

        def build(E: CoTerm) -> CoTerm:
            return RecNat(zout, e.pred_var, e.result_var, sout, E, annot=result)

        return Nat(), self._as_covalue(rout, result, build, Nat())

    def _recnum(self, env: TypeEnv, e: RecNum, payload: TypeExpr, path: str) -> tuple[TypeExpr, CoTerm]:
        result = e.annot
        zenv = env.bind_var(e.payload_var, payload)
        zout: Term | None = None
        if result is None:
            try:
                result, zout = self.term_infer(zenv, e.zero_body, f"{path}.zero")
            except TypeCheckError as ex:
                if ex.kind != "AnnotationRequired":
                    raise
                result, _ = self.coterm_infer(env, e.ret, f"{path}.ret")
                zout = None
        if zout is None:
            zout = self.term_check(zenv, e.zero_body, result, f"{path}.zero")
        senv = env.bind_var(e.pred_var, Numbered(payload)).bind_var(e.result_var, result)
        sout = self.term_check(senv, e.succ_body, result, f"{path}.succ")
        rout = self.coterm_check(env, e.ret, result, f"{path}.ret")

        def build(E: CoTerm) -> CoTerm:
            return RecNum(e.payload_var, zout, e.pred_var, e.result_var, sout, E,
                          payload_annot=payload, annot=result)

        return Numbered(payload), self._as_covalue(rout, result, build, Numbered(payload))

    # -- commands

    def command(self, env: TypeEnv, c: Command, path: str) -> Command:
        try:
            ty, vout = self.term_infer(env, c.producer, f"{path}.producer")
        except TypeCheckError as first:
            if first.kind != "AnnotationRequired":
                raise
            ty, eout = self.coterm_infer(env, c.consumer, f"{path}.consumer")
            vout = self.term_check(env, c.producer, ty, f"{path}.producer")
            return Command(vout, eout)
        consumer_path = f"{path}.consumer"
        try:
            eout = self.coterm_check(env, c.consumer, ty, consumer_path)
        except TypeCheckError as ex:
            if ex.kind == "Mismatch" and ex.path == consumer_path and ex.found is not None:
                raise TypeCheckError("CutMismatch", path, "producer and consumer disagree",
                                     expected=ty, found=ex.found) from None
            raise
        return Command(vout, eout)


def translate(t: Term, s: Strategy, program: Program | None = None,
              env: TypeEnv | None = None, expected: TypeExpr | None = None) -> Term:
    """Compile a front-end term to the machine language for strategy s."""

    comp = Compiler(program, s)
    if expected is not None:
        return comp.term_check(env or EMPTY_ENV, t, expected, "term")
    return comp.term_infer(env or EMPTY_ENV, t, "term")[1]


def infer(t: Term, program: Program | None = None, env: TypeEnv | None = None) -> TypeExpr:
    """Front-end typing: the type of a mixed term (strategy-independent)."""

    return Compiler(program, CBV).term_infer(env or EMPTY_ENV, t, "term")[0]


# ---------------------------------------------------------------------------
# Reference small-step interpreter (independent oracle)


class OracleError(Exception):
    pass


def _expand(t: Term, prog: Program, bound: frozenset[str] = frozenset()) -> Term:
    """Inline references and numerals; the result is reference-evaluable.

    Free variables naming a definition count as references, so terms parsed
    without a definition context still resolve.
    """

    match t:
        case Ref(name):
            if name not in prog.defs:
                raise OracleError(f"unknown definition {name!r}")
            return _expand(prog.defs[name].body, prog)
        case NumLit(n):
            return numeral(n)
        case Var(name):
            if name not in bound and name in prog.defs:
                return _expand(prog.defs[name].body, prog)
            return t
        case Zero():
            return t
        case Succ(arg):
            return Succ(_expand(arg, prog, bound))
        case Lam(x, body, annot):
            return Lam(x, _expand(body, prog, bound | {x}), annot)
        case App(fn, arg):
            return App(_expand(fn, prog, bound), _expand(arg, prog, bound))
        case RecTerm(scrut, zb, x, y, sb):
            return RecTerm(
                _expand(scrut, prog, bound),
                _expand(zb, prog, bound),
                x,
                y,
                _expand(sb, prog, bound | {x, y}),
            )
        case _:
            raise OracleError(
                f"{type(t).__name__} is outside the reference interpreter's language"
            )


def _ssubst(t: Term, x: str, v: Term) -> Term:
    """Substitution for the reference interpreter only; shares nothing with
    the machine's substitution."""

    if x not in t.free_vars:
        return t
    match t:
        case Var(name):
            return v if name == x else t
        case Succ(arg):
            return Succ(_ssubst(arg, x, v))
        case Lam(y, body, annot):
            if y == x:
                return t
            if y in v.free_vars:
                y2 = fresh_name(v.free_vars | body.free_vars, y)
                body = _ssubst(body, y, Var(y2))
                y = y2
            return Lam(y, _ssubst(body, x, v), annot)
        case App(fn, arg):
            return App(_ssubst(fn, x, v), _ssubst(arg, x, v))
        case RecTerm(scrut, zb, p, r, sb):
            scrut2 = _ssubst(scrut, x, v)
            zb2 = _ssubst(zb, x, v)
            if x in (p, r):
                return RecTerm(scrut2, zb2, p, r, sb)
            if p in v.free_vars or r in v.free_vars:
                avoid = v.free_vars | sb.free_vars
                p2 = fresh_name(avoid, p)
                r2 = fresh_name(avoid | {p2}, r)
                sb = _ssubst(_ssubst(sb, p, Var(p2)), r, Var(r2))
                p, r = p2, r2
            return RecTerm(scrut2, zb2, p, r, _ssubst(sb, x, v))
    raise OracleError(f"cannot substitute into {type(t).__name__}")


def _svalue(t: Term, s: Strategy) -> bool:
    if s is CBN:
        return True
    while isinstance(t, Succ):
        t = t.arg
    return isinstance(t, (Var, Lam, Zero))


def _sstep(t: Term, s: Strategy):
    """One step of the front-end operational semantics, or None at a normal
    form.  Returns (next term, rule name)."""

    match t:
        case App(fn, arg):
            if s is CBN:
                if isinstance(fn, Lam):
                    return _ssubst(fn.body, fn.var, arg), "BetaArrow"
                r = _sstep(fn, s)
                return (App(r[0], arg), r[1]) if r else None
            if not _svalue(fn, s):
                r = _sstep(fn, s)
                return (App(r[0], arg), r[1]) if r else None
            if not _svalue(arg, s):
                r = _sstep(arg, s)
                return (App(fn, r[0]), r[1]) if r else None
            if isinstance(fn, Lam):
                return _ssubst(fn.body, fn.var, arg), "BetaArrow"
            return None
        case RecTerm(scrut, zb, x, y, sb):
            if isinstance(scrut, Zero):
                return zb, "BetaZero"
            if isinstance(scrut, Succ) and (s is CBN or _svalue(scrut.arg, s)):
                pred = scrut.arg
                rec = RecTerm(pred, zb, x, y, sb)
                return App(Lam(y, _ssubst(sb, x, pred)), rec), "BetaSucc"
            r = _sstep(scrut, s)
            return (RecTerm(r[0], zb, x, y, sb), r[1]) if r else None
        case Succ(arg) if s is CBV:
            r = _sstep(arg, s)
            return (Succ(r[0]), r[1]) if r else None
        case _:
            return None


def reference_trace(t: Term, s: Strategy, fuel: int = 10**6,
                    program: Program | None = None) -> tuple[Term, list[str]]:
    """Normal form plus the sequence of rules fired along the way."""

    t = _expand(t, program if program is not None else Program({}, None))
    rules: list[str] = []
    for _ in range(fuel):
        r = _sstep(t, s)
        if r is None:
            return t, rules
        t, rule = r
        rules.append(rule)
    raise OracleError("reference evaluation ran out of fuel")


def reference_eval(t: Term, s: Strategy, fuel: int = 10**6,
                   program: Program | None = None) -> Term:
    """Normal form of a closed front-end term under strategy s."""

    return reference_trace(t, s, fuel, program)[0]


def surface_force_numeral(t: Term, s: Strategy, fuel: int = 10**6,
                          program: Program | None = None) -> int:
    """Numeric value of a Nat-typed term; re-evaluates under successors so
    call-by-name weak normal forms count fully."""

    t = reference_eval(t, s, fuel, program)
    n = 0
    while True:
        match t:
            case Zero():
                return n
            case Succ(arg):
                n += 1
                t = reference_eval(arg, s, fuel)
            case _:
                raise OracleError(f"normal form is not a numeral: {type(t).__name__}")


# ---------------------------------------------------------------------------
# Case / iterator sugar and the two encodings


def desugar_case(zero_body: Term, pred_var: str, succ_body: Term, ret: CoTerm,
                 annot: TypeExpr | None = None) -> RecNat:
    """Shallow case analysis: a recursor whose recursive result is unused."""

    unused = fresh_name(succ_body.free_vars | {pred_var}, "_")
    return RecNat(zero_body, pred_var, unused, succ_body, ret, annot=annot)


def desugar_iter(zero_body: Term, result_var: str, succ_body: Term, ret: CoTerm,
                 annot: TypeExpr | None = None) -> RecNat:
    """Pure iteration: a recursor whose predecessor is unused."""

    unused = fresh_name(succ_body.free_vars | {result_var}, "_")
    return RecNat(zero_body, unused, result_var, succ_body, ret, annot=annot)


def desugar_cocase(head_covar: str, head_body: CoTerm, tail_covar: str, tail_body: CoTerm,
                   seed: Term, elem_annot: TypeExpr | None = None) -> CoRec:
    """Shallow copattern match: a corecursor that never corecurses."""

    unused = fresh_name(tail_body.free_covars | {tail_covar}, "_")
    return CoRec(head_covar, head_body, tail_covar, unused, tail_body, seed,
                 elem_annot=elem_annot)


def desugar_coiter(head_covar: str, head_body: CoTerm, seed_covar: str, tail_body: CoTerm,
                   seed: Term, elem_annot: TypeExpr | None = None) -> CoRec:
    """Pure coiteration: a corecursor that cannot escape with another stream."""

    unused = fresh_name(tail_body.free_covars | {seed_covar}, "_")
    return CoRec(head_covar, head_body, unused, seed_covar, tail_body, seed,
                 elem_annot=elem_annot)


def _staged_pair(left: Term, ltype: TypeExpr, right: Term, rtype: TypeExpr,
                 s: Strategy) -> Term:
    """A pair whose non-value components are named first (left to right)."""

    pt = Prod(ltype, rtype)
    lv = is_value(left, s)
    rv = is_value(right, s)
    if lv and rv:
        return Pair(left, right)
    avoid_v = left.free_vars | right.free_vars
    avoid_c = left.free_covars | right.free_covars
    a = fresh_name(avoid_c, "a")
    if not lv and not rv:
        u = fresh_name(avoid_v, "u")
        w = fresh_name(avoid_v | {u}, "w")
        inner = MuTilde(w, Command(Pair(Var(u), Var(w)), CoVar(a)), rtype)
        mid = MuTilde(u, Command(right, inner), ltype)
        return Mu(a, Command(left, mid), pt)
    if not lv:
        u = fresh_name(avoid_v, "u")
        inner = MuTilde(u, Command(Pair(Var(u), right), CoVar(a)), ltype)
        return Mu(a, Command(left, inner), pt)
    w = fresh_name(avoid_v, "w")
    inner = MuTilde(w, Command(Pair(left, Var(w)), CoVar(a)), rtype)
    return Mu(a, Command(right, inner), pt)


def _staged_fst(rest: CoTerm, s: Strategy, pair_type: Prod) -> CoTerm:
    if is_covalue(rest, s):
        return Fst(rest, pair_type.right)
    b = fresh_name(rest.free_covars, "b")
    p = fresh_name(rest.free_vars, "p")
    return MuTilde(
        p, Command(Mu(b, Command(Var(p), Fst(CoVar(b), pair_type.right)), pair_type.left), rest),
        pair_type,
    )


def _staged_snd(rest: CoTerm, s: Strategy, pair_type: Prod) -> CoTerm:
    if is_covalue(rest, s):
        return Snd(rest, pair_type.left)
    b = fresh_name(rest.free_covars, "b")
    p = fresh_name(rest.free_vars, "p")
    return MuTilde(
        p, Command(Mu(b, Command(Var(p), Snd(CoVar(b), pair_type.left)), pair_type.right), rest),
        pair_type,
    )


def encode_rec_via_iter(rec: RecNat, s: Strategy, result_type: TypeExpr | None = None) -> CoTerm:
    """Rewrite a recursor as an iterator over pairs.

    The iterator rebuilds the consumed number in the first component while
    computing the requested result in the second, and the final
    continuation projects the second component.  Costs the recursor its
    ability to stop early, which is observable in call-by-name.
    """

    result = result_type or rec.annot
    if result is None:
        raise ValueError("encoding needs the recursor's result type (elaborate first)")
    pt = Prod(Nat(), result)
    x, y = rec.pred_var, rec.result_var
    zpair = _staged_pair(Zero(), Nat(), rec.zero_body, result, s)
    spair = _staged_pair(Succ(Var(x)), Nat(), rec.succ_body, result, s)
    z = fresh_name(rec.succ_body.free_vars | {x, y}, "p")
    k = fresh_name(rec.succ_body.free_covars, "a")
    extract = _staged_fst(
        MuTilde(
            x,
            Command(Var(z), _staged_snd(MuTilde(y, Command(spair, CoVar(k)), result), s, pt)),
            Nat(),
        ),
        s,
        pt,
    )
    body = Mu(k, Command(Var(z), extract), pt)
    unused = fresh_name(body.free_vars | {z}, "_")
    return RecNat(zpair, unused, z, body, _staged_snd(rec.ret, s, pt), annot=pt)


def encode_corec_via_coiter(cr: CoRec, s: Strategy, seed_type: TypeExpr | None = None) -> Term:
    """Rewrite a corecursor as a coiterator over sums.

    The coiterator's seed is either the original seed (right injection) or
    a whole stream to mimic from now on (left injection); the tail branch
    rebuilds both continuations as a case split.  Costs the corecursor its
    ability to hand off to another stream, which is observable in
    call-by-value.
    """

    elem = cr.elem_annot
    seed_ty = seed_type or cr.seed_annot
    if elem is None or seed_ty is None:
        raise ValueError("encoding needs the corecursor's element and seed types (elaborate first)")
    st = Sum(Stream(elem), seed_ty)
    beta, gamma = cr.tail_covar, cr.tail_seed_covar
    head_body = SumCase(Head(CoVar(cr.head_covar)), cr.head_body)
    core = SumCase(Tail(CoVar(beta)), cr.tail_body)
    x = fresh_name(cr.tail_body.free_vars, "x")
    d = fresh_name(cr.tail_body.free_covars | {beta, gamma}, "d")

    right_part: Term = Mu(gamma, Command(Var(x), core), seed_ty)
    if not is_value(right_part, s):
        b = fresh_name(cr.tail_body.free_covars | {beta, gamma, d}, "b")
        yr = fresh_name(cr.tail_body.free_vars | {x}, "y")
        right_part = Mu(
            b,
            Command(right_part, MuTilde(yr, Command(InR(Var(yr), Stream(elem)), CoVar(b)), seed_ty)),
            st,
        )
    else:
        right_part = InR(right_part, Stream(elem))

    left_core: Term = Mu(beta, Command(right_part, CoVar(d)), Stream(elem))
    if not is_value(left_core, s):
        a = fresh_name(cr.tail_body.free_covars | {beta, gamma, d}, "a")
        yl = fresh_name(cr.tail_body.free_vars | {x}, "y")
        left_part: Term = Mu(
            a,
            Command(left_core, MuTilde(yl, Command(InL(Var(yl), seed_ty), CoVar(a)), Stream(elem))),
            st,
        )
    else:
        left_part = InL(left_core, seed_ty)

    tail_body = MuTilde(x, Command(left_part, CoVar(d)), st)
    unused = fresh_name(tail_body.free_covars | {d}, "_")
    seed = InR(cr.seed, Stream(elem))
    return CoRec(cr.head_covar, head_body, unused, d, tail_body, seed,
                 elem_annot=elem, seed_annot=st)


# ---------------------------------------------------------------------------
# Prelude


@lru_cache(maxsize=1)
def prelude() -> Program:
    """The standard definitions, parsed from the packaged source file."""

    text = importlib.resources.files(__package__).joinpath("prelude.ct").read_text()
    return parse(text)


def prelude_term(name: str, s: Strategy) -> Term:
    """A prelude definition compiled to the machine language."""

    return Compiler(prelude(), s).lookup_def(name, name)[1]
