"""Kernel: values, substitution, alpha-equivalence, grammar checks, printing."""

import pytest
from hypothesis import given, settings, strategies as st

from duality_vm.kernel import (
    CBN,
    CBV,
    Call,
    Command,
    CoVar,
    Fst,
    Head,
    InL,
    Lam,
    Mu,
    MuTilde,
    Nat,
    Pair,
    RecNat,
    Snd,
    Stream,
    Succ,
    SumCase,
    Tail,
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
from duality_vm.parser import parse_command, parse_coterm, parse_term, parse_type

MU0 = Mu("a", Command(Zero(), CoVar("a")))  # mu a. <Z | a>
MT0 = MuTilde("x", Command(Var("x"), CoVar("a")))  # comu x. <x | a>


# ---------------------------------------------------------------------------
# Values and covalues


def test_succ_of_zero_is_value_everywhere():
    assert is_value(Succ(Zero()), CBV)
    assert is_value(Succ(Zero()), CBN)


def test_mu_is_not_a_cbv_value_but_is_a_cbn_value():
    assert not is_value(MU0, CBV)
    assert is_value(MU0, CBN)


def test_mutilde_is_a_cbv_covalue_but_not_a_cbn_covalue():
    assert is_covalue(MT0, CBV)
    assert not is_covalue(MT0, CBN)


def test_head_over_covar_is_a_cbn_covalue():
    assert is_covalue(Head(CoVar("a")), CBN)


def test_cbn_values_cover_every_term():
    terms = [
        Var("x"), MU0, Lam("x", Var("x")), Zero(), Succ(MU0),
        Pair(MU0, Zero()), InL(MU0), numeral(3),
    ]
    for t in terms:
        assert is_value(t, CBN)


def test_cbv_covalues_cover_every_coterm():
    coterms = [
        CoVar("a"), MT0, Call(Zero(), MT0), Head(MT0), Fst(MT0),
        RecNat(Zero(), "x", "y", Var("y"), MT0), SumCase(MT0, CoVar("a")),
    ]
    for e in coterms:
        assert is_covalue(e, CBV)


def test_cbn_covalue_needs_covalue_tails():
    assert is_covalue(Call(Zero(), CoVar("a")), CBN)
    assert not is_covalue(Call(Zero(), MT0), CBN)
    assert not is_covalue(Head(MT0), CBN)
    assert is_covalue(Tail(Head(CoVar("a"))), CBN)
    # A case split forces its input regardless of branch shape.
    assert is_covalue(SumCase(MT0, MT0), CBN)


def test_cbv_value_needs_value_arguments():
    assert is_value(Pair(Zero(), Succ(Zero())), CBV)
    assert not is_value(Pair(MU0, Zero()), CBV)
    assert not is_value(Succ(MU0), CBV)
    assert is_value(InL(Zero()), CBV)
    assert not is_value(InL(MU0), CBV)


# ---------------------------------------------------------------------------
# Substitution


def test_subst_var_simple():
    c = parse_command("<x | a>")
    assert subst_var(c, "x", Zero()) == parse_command("<Z | a>")


def test_subst_var_leaves_bound_occurrences():
    c = Command(Lam("x", Var("x")), Call(Var("x"), CoVar("a")))
    out = subst_var(c, "x", Succ(Zero()))
    assert alpha_eq(out, Command(Lam("x", Var("x")), Call(Succ(Zero()), CoVar("a"))))


def test_subst_var_shadowed_by_mutilde():
    c = parse_command("<x | comu x. <x | a>>")
    out = subst_var(c, "x", Zero())
    assert alpha_eq(out, parse_command("<Z | comu x. <x | a>>"))


def test_subst_covar_simple():
    c = parse_command("<Z | a>")
    assert subst_covar(c, "a", Head(CoVar("b"))) == parse_command("<Z | head b>")


def test_subst_covar_bound_untouched():
    c = parse_command("<mu a. <Z | a> | b>")
    out = subst_covar(c, "b", CoVar("a0"))
    assert alpha_eq(out, parse_command("<mu a. <Z | a> | a0>"))


def test_subst_covar_into_recursor_ret():
    c = parse_command("<Z | rec { Z -> 3 | S x -> z. S z } with a>")
    out = subst_covar(c, "a", parse_coterm("comu z. <S z | a0>"))
    assert alpha_eq(out, parse_command("<Z | rec { Z -> 3 | S x -> z. S z } with comu z. <S z | a0>>"))


def test_subst_avoids_capture():
    # Substituting a term with free y under a binder named y must rename.
    c = parse_command("<fun y : Nat => x | a>")
    out = subst_var(c, "x", Var("y"))
    lam = out.producer
    assert lam.var != "y"
    assert lam.body == Var("y")


def test_subst_no_free_occurrence_is_identity():
    c = parse_command("<mu a. <Z | a> | b>")
    assert subst_var(c, "zzz", Zero()) is c


def test_subst_commutes_for_independent_names():
    c = parse_command("<x | comu w. <y | a>>")
    one = subst_var(subst_var(c, "x", Zero()), "y", Succ(Zero()))
    two = subst_var(subst_var(c, "y", Succ(Zero())), "x", Zero())
    assert alpha_eq(one, two)


# Independent oracle: a tiny de-Bruijn-style substitution for the pure
# mu/comu/var/covar fragment, against which the kernel substitution is
# cross-checked on generated terms.


def _db(node, venv, cenv):
    """Convert to a nameless tuple form, with free names kept as strings."""

    match node:
        case Command(v, e):
            return ("cmd", _db(v, venv, cenv), _db(e, venv, cenv))
        case Var(n):
            return ("v", venv.index(n) if n in venv else n)
        case CoVar(n):
            return ("c", cenv.index(n) if n in cenv else n)
        case Mu(a, body, _):
            return ("mu", _db(body, venv, [a] + cenv))
        case MuTilde(x, body, _):
            return ("mt", _db(body, [x] + venv, cenv))
        case Zero():
            return ("z",)
        case Succ(arg):
            return ("s", _db(arg, venv, cenv))
    raise AssertionError(node)


def _db_subst(t, name, repl):
    """Substitute in nameless form: free names need no capture machinery."""

    match t:
        case ("v", n) if n == name:
            return repl
        case ("cmd", v, e):
            return ("cmd", _db_subst(v, name, repl), _db_subst(e, name, repl))
        case ("mu", b):
            return ("mu", _db_subst(b, name, repl))
        case ("mt", b):
            return ("mt", _db_subst(b, name, repl))
        case ("s", a):
            return ("s", _db_subst(a, name, repl))
        case _:
            return t


@st.composite
def small_commands(draw):
    names = ["x", "y"]
    conames = ["a", "b"]

    def term(depth):
        kind = draw(st.sampled_from(["var", "zero", "succ", "mu"] if depth else ["var", "zero"]))
        if kind == "var":
            return Var(draw(st.sampled_from(names)))
        if kind == "zero":
            return Zero()
        if kind == "succ":
            return Succ(term(depth - 1))
        return Mu(draw(st.sampled_from(conames)), command(depth - 1))

    def coterm(depth):
        kind = draw(st.sampled_from(["covar", "mt"] if depth else ["covar"]))
        if kind == "covar":
            return CoVar(draw(st.sampled_from(conames)))
        return MuTilde(draw(st.sampled_from(names)), command(depth - 1))

    def command(depth):
        return Command(term(depth), coterm(depth))

    return command(draw(st.integers(min_value=0, max_value=3)))


@settings(max_examples=150, deadline=None)
@given(small_commands(), small_commands())
def test_subst_matches_nameless_oracle(c, repl_cmd):
    repl = Mu("a", repl_cmd)
    got = subst_var(c, "x", repl)
    want = _db_subst(_db(c, [], []), "x", _db(repl, [], []))
    assert _db(got, [], []) == want


@settings(max_examples=100, deadline=None)
@given(small_commands())
def test_alpha_eq_invariant_under_renaming(c):
    # Renaming a bound mu variable must not change alpha-identity.
    wrapped1 = Mu("a", c)
    wrapped2 = Mu("zz", subst_covar(c, "a", CoVar("zz")))
    assert alpha_eq(wrapped1, wrapped2)


# ---------------------------------------------------------------------------
# alpha_eq and fresh_name


def test_alpha_eq_lambda():
    assert alpha_eq(Lam("x", Var("x")), Lam("y", Var("y")))


def test_alpha_eq_mu():
    assert alpha_eq(parse_term("mu a. <Z | a>"), parse_term("mu b. <Z | b>"))


def test_alpha_eq_distinguishes_bodies():
    assert not alpha_eq(Lam("x", Zero()), Lam("x", Succ(Zero())))


def test_alpha_eq_free_names_matter():
    assert not alpha_eq(Var("x"), Var("y"))
    assert alpha_eq(Var("x"), Var("x"))


def test_fresh_name():
    assert fresh_name({"x"}, "x") == "x1"
    assert fresh_name(set(), "x") == "x"
    assert fresh_name({"x", "x1"}, "x") == "x2"


# ---------------------------------------------------------------------------
# Well-formedness


def test_succ_of_mu_is_illegal_cbv_but_legal_cbn():
    c = Command(Succ(MU0), CoVar("a0"))
    bad = well_formed(c, CBV)
    assert len(bad) == 1 and "arg" in bad[0].path
    assert well_formed(c, CBN) == []


def test_call_with_mu_argument_flagged_under_cbv():
    c = Command(Lam("x", Var("x")), Call(MU0, CoVar("b")))
    bad = well_formed(c, CBV)
    assert any("arg" in v.path for v in bad)
    # Under call-by-name every term is a value, so the same stack is fine
    # (the machine's own reduction creates such stacks in call-by-name).
    assert well_formed(c, CBN) == []


def test_mutilde_tails_flagged_under_cbn():
    c = Command(Zero(), Head(MT0))
    assert well_formed(c, CBV) == []
    bad = well_formed(c, CBN)
    assert len(bad) == 1 and "rest" in bad[0].path


def test_well_formed_reports_all_violations_with_paths():
    c = Command(Succ(MU0), Call(MU0, MT0))
    bad = well_formed(c, CBV)
    assert {v.path for v in bad} == {"command.producer.arg", "command.consumer.arg"}


def test_well_formed_preserved_by_value_substitution():
    c = parse_command("<S x | comu y. <y | a0>>")
    assert well_formed(c, CBV) == []
    out = subst_var(c, "x", numeral(2))
    assert well_formed(out, CBV) == []
    out_cbn = subst_var(c, "x", MU0)  # mu-term: a CBN value
    assert well_formed(out_cbn, CBN) == []


# ---------------------------------------------------------------------------
# Printing and round trips


def test_pretty_examples():
    assert pretty(Zero()) == "Z"
    assert pretty(numeral(2)) == "2"
    assert pretty(Command(Zero(), CoVar("a0"))) == "<Z | a0>"


def test_pretty_succ_of_non_numeral():
    assert pretty(Succ(Var("x"))) == "S x"


def test_type_round_trips():
    for text in ["Nat", "Stream Nat", "Nat -> Nat -> Nat", "(Nat -> Nat) -> Nat",
                 "Nat * Nat + Nat", "Num (Stream Nat)", "Stream (Nat * Nat)",
                 "Nat + Nat * Nat", "Num Nat -> Stream Nat"]:
        t = parse_type(text)
        assert parse_type(type_str(t)) == t


ROUND_TRIP_TERMS = [
    "Z",
    "5",
    "S (S x)",
    "fun x : Nat => x",
    "mu a : Nat. <Z | a>",
    "mu a. <x | rec { Z -> y | S _ -> z. S z } with a>",
    "corec : Nat { head a -> a | tail _ -> g. g } with x",
    "corec : Nat { head a -> a | tail b -> _. comu _ : Nat. <s | b> } with x",
    "pair(Z, S Z)",
    "inl : Nat Z",
    "inr : Stream Nat (numZ x)",
    "numS (numZ x)",
]

ROUND_TRIP_COTERMS = [
    "a0",
    "2 . 3 . a0",
    "head (tail a0)",
    "comu x : Nat. <x | a0>",
    "rec { Z -> Z | S x -> z. x } with a0",
    "rec : Nat { Z p -> p | S y -> z. z } with a0",
    "fst : Nat a0",
    "snd : Nat (head a0)",
    "case[a0, head a1]",
    "(fun x : Nat => x) . a0",
]


@pytest.mark.parametrize("text", ROUND_TRIP_TERMS)
def test_term_round_trip(text):
    t = parse_term(text)
    assert alpha_eq(parse_term(pretty(t)), t)


@pytest.mark.parametrize("text", ROUND_TRIP_COTERMS)
def test_coterm_round_trip(text):
    e = parse_coterm(text)
    assert alpha_eq(parse_coterm(pretty(e)), e)


def test_command_round_trip():
    c = parse_command("<mu a. <Z | a> | comu x. <x | a0>>")
    assert alpha_eq(parse_command(pretty(c)), c)


def test_as_numeral():
    assert as_numeral(numeral(7)) == 7
    assert as_numeral(Succ(Var("x"))) is None


def test_round_trip_and_cbn_values_on_generated_commands():
    from generators import DualGen, TypedGen

    cmds = []
    tg = TypedGen(7)
    cmds += [tg.command(depth=4) for _ in range(40)]
    dg = DualGen(8)
    cmds += [dg.command(depth=3)[0] for _ in range(40)]
    for c in cmds:
        assert alpha_eq(parse_command(pretty(c)), c)
        assert is_value(c.producer, CBN)
        assert is_covalue(c.consumer, CBV)
