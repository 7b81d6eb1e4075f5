"""Duality: type duals, node duals, involution, typing, lockstep simulation."""

import pytest

from duality_vm.duality import (
    DualityContext,
    NotDualizable,
    dual_command,
    dual_coterm,
    dual_env,
    dual_rule,
    dual_strategy,
    dual_term,
    dual_type,
)
from duality_vm.kernel import (
    CBN,
    CBV,
    Command,
    CoRec,
    CoVar,
    Fn,
    Head,
    Lam,
    Nat,
    Numbered,
    NumZero,
    Prod,
    RecNum,
    Stream,
    Succ,
    Sum,
    Var,
    Zero,
    alpha_eq,
    well_formed,
)
from duality_vm.machine import RuleTag, Stepped, step
from duality_vm.parser import parse_command, parse_coterm, parse_term
from duality_vm.typechecker import TypeEnv, check_command, elaborate_command

from generators import DualGen

NAT = Nat()


# ---------------------------------------------------------------------------
# Types


def test_dual_type_structural():
    x = Prod(NAT, NAT)
    assert dual_type(Numbered(Numbered(x))) == Stream(Stream(Sum(NAT, NAT)))


def test_dual_type_involution():
    for t in [NAT, Numbered(NAT), Stream(Numbered(NAT)), Prod(NAT, Sum(NAT, NAT))]:
        assert dual_type(dual_type(t)) == t


def test_function_types_have_no_dual():
    with pytest.raises(NotDualizable):
        dual_type(Fn(NAT, NAT))


def test_dual_strategy():
    assert dual_strategy(CBV) is CBN
    assert dual_strategy(CBN) is CBV
    assert dual_strategy(dual_strategy(CBV)) is CBV


def test_dual_rule_pairs():
    assert dual_rule(RuleTag.MU) == RuleTag.MU_TILDE
    assert dual_rule(RuleTag.BETA_NUM_ZERO) == RuleTag.BETA_HEAD
    assert dual_rule(RuleTag.BETA_NUM_SUCC) == RuleTag.BETA_TAIL
    assert dual_rule(RuleTag.BETA_FST) == RuleTag.BETA_INL
    with pytest.raises(NotDualizable):
        dual_rule(RuleTag.BETA_ARROW)


# ---------------------------------------------------------------------------
# Terms and coterms


def test_numzero_dualizes_to_head():
    out = dual_term(NumZero(Var("x")))
    assert out == Head(CoVar("x"))


def test_corec_dualizes_to_generalized_recursor():
    cr = parse_term("corec : Nat { head a -> a | tail b -> g. g } with x")
    out = dual_term(cr)
    assert isinstance(out, RecNum)
    assert out.payload_var == "a" and out.zero_body == Var("a")
    assert out.ret == CoVar("x")  # the seed pairs with the return continuation
    back = dual_coterm(out)
    assert alpha_eq(back, cr)


def test_dual_involution_on_nodes():
    nodes = [
        parse_term("numS (numZ x)"),
        parse_term("pair(x, y)"),
        parse_term("inl : Nat x"),
        parse_term("mu a : Nat. <x | a>"),
    ]
    for n in nodes:
        assert alpha_eq(dual_coterm(dual_term(n)), n)


def test_plain_numbers_and_functions_not_dualizable():
    for bad in [Zero(), Succ(Zero()), Lam("x", Var("x"))]:
        with pytest.raises(NotDualizable):
            dual_term(bad)
    with pytest.raises(NotDualizable):
        dual_coterm(parse_coterm("x . a0"))
    with pytest.raises(NotDualizable):
        dual_coterm(parse_coterm("rec { Z -> x | S p -> q. q } with a0"))


def test_explicit_pairing_context():
    ctx = DualityContext().pair("x", "alpha")
    assert dual_term(Var("x"), ctx) == CoVar("alpha")
    assert dual_coterm(CoVar("alpha"), ctx) == Var("x")


def test_command_sides_swap():
    c = parse_command("<numZ x | head a0>")
    d = dual_command(c)
    assert d == parse_command("<numZ a0 | head x>")


# ---------------------------------------------------------------------------
# Generated corpus: involution, typing, lockstep


def _corpus(n=120, depth=4):
    gen = DualGen(20240)
    out = []
    for _ in range(n):
        cmd, fv, fc = gen.command(depth=depth)
        out.append((cmd, TypeEnv.make(vars=fv, covars=fc)))
    return out


CORPUS = _corpus()


def test_corpus_is_large_enough():
    assert len(CORPUS) >= 100


def test_involution_on_corpus():
    for cmd, env in CORPUS:
        cmd = elaborate_command(env, cmd)
        assert alpha_eq(dual_command(dual_command(cmd)), cmd)


def test_type_duality_on_corpus():
    for cmd, env in CORPUS:
        cmd = elaborate_command(env, cmd)
        check_command(dual_env(env), dual_command(cmd))


def test_well_formedness_dualizes():
    for cmd, env in CORPUS:
        cmd = elaborate_command(env, cmd)
        for s in (CBV, CBN):
            if not well_formed(cmd, s):
                assert well_formed(dual_command(cmd), dual_strategy(s)) == []


@pytest.mark.parametrize("s", [CBV, CBN])
def test_lockstep_simulation(s):
    # Stepping the dual command under the dual strategy mirrors every step,
    # with dual rule tags and dual successor states.  This is the empirical
    # validation of the numbered-value reduction rules.
    steps_seen = 0
    for cmd, env in CORPUS:
        cmd = elaborate_command(env, cmd)
        if well_formed(cmd, s):
            continue
        c1, c2 = cmd, dual_command(cmd)
        for _ in range(3000):
            o1 = step(c1, s)
            o2 = step(c2, dual_strategy(s))
            if not isinstance(o1, Stepped):
                assert not isinstance(o2, Stepped)
                break
            assert isinstance(o2, Stepped)
            assert o2.rule == dual_rule(o1.rule)
            assert alpha_eq(dual_command(o1.next), o2.next)
            c1, c2 = o1.next, o2.next
            steps_seen += 1
        else:
            raise AssertionError("lockstep run did not settle")
    assert steps_seen > 200  # the corpus actually exercises the rules
