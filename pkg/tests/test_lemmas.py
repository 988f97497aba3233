import random

import pytest

from assgp.batteries import eta_battery, retraction_battery, sandwich_battery, trace_battery
from assgp.lemmas import (
    LemmaViolation,
    SandwichInstance,
    assgp_extend,
    eta_equality,
    fresh_count,
    random_eta_instance,
    random_sandwich,
    sandwich_reduce,
    verify_assgp,
)
from assgp.systems import InWithCert, check_certificate, closure_seed, member_decide, seed_system
from assgp.words import E, Word, inv, lett, mul, power, product

X, Y, Z = Word((1,)), Word((2,)), Word((3,))
G0 = Word((2, 1, 3))  # letter 0 occurs once


def test_sandwich_trivial():
    inst = SandwichInstance(G0, 0, (E, E, E), (1, -1))
    assert sandwich_reduce(inst) == E


def test_sandwich_with_walls():
    inst = SandwichInstance(G0, 0, (Y, E, inv(Y)), (1, -1))
    assert sandwich_reduce(inst) == mul(Y, inv(Y)) == E


def test_sandwich_nested():
    inst = SandwichInstance(G0, 0, (Y, E, E, E, Z), (1, 1, -1, -1))
    trace = []
    assert sandwich_reduce(inst, trace) == mul(Y, Z)
    assert trace == [1, 0]


def test_sandwich_rejects_bad_hypotheses():
    with pytest.raises(LemmaViolation) as info:
        sandwich_reduce(SandwichInstance(G0, 0, (X, E, E), (1, -1)))
    assert info.value.clause == "(ii)"
    with pytest.raises(LemmaViolation) as info:
        sandwich_reduce(SandwichInstance(G0, 0, (E, E), (1,)))
    assert info.value.clause == "(iii)"
    with pytest.raises(LemmaViolation) as info:
        sandwich_reduce(SandwichInstance(mul(G0, G0), 0, (E, E, E), (1, -1)))
    assert info.value.clause == "(i)"


def test_random_sandwiches_match_direct():
    rng = random.Random(11)
    for _ in range(300):
        inst = random_sandwich(rng)
        assert sandwich_reduce(inst) == product(inst.pieces())


def test_eta_examples():
    r = eta_equality([G0, inv(G0)], G0, 0)
    assert r.holds and r.lhs == r.rhs == E
    plain = [Y, Z, inv(Y)]
    r = eta_equality(plain, G0, 0)
    assert r.holds and r.collapsed == tuple(plain)
    r = eta_equality([X, power(G0, 2), power(G0, -2), inv(X)], G0, 2)
    assert r.holds and r.lhs == r.rhs == E


def test_eta_uses_distinguished_letter_not_x():
    # x itself may appear in walls; the distinguished letter must not
    g0 = Word((3, 1))
    r = eta_equality([X, power(g0, 2), power(g0, -2), inv(X)], g0, 2)
    assert r.holds


def test_eta_hypothesis_violations():
    with pytest.raises(LemmaViolation) as info:
        eta_equality([G0], G0, 0)
    assert info.value.clause == "(b)"
    with pytest.raises(LemmaViolation) as info:
        eta_equality([X, inv(X)], G0, 0)
    assert info.value.clause == "(c)"


def test_random_eta_instances():
    rng = random.Random(5)
    for _ in range(300):
        factors, g0, letter = random_eta_instance(rng)
        assert eta_equality(factors, g0, letter).holds


def test_assgp_extend_small():
    wit = assgp_extend(seed_system({0}, 1), X)
    assert wit.k == fresh_count(wit.base) == 5
    ys = [Word((y + 1,)) for y in wit.fresh]
    assert wit.g0 == mul(Word(tuple(y + 1 for y in wit.fresh)), X)
    assert [f.word for f in wit.factors] == [inv(y) for y in reversed(ys)] + [wit.g0]
    assert wit.product() == X
    assert wit.check().ok


def test_assgp_extend_identity():
    wit = assgp_extend(seed_system({0}, 1), E)
    assert wit.product() == E and wit.check().ok


def test_assgp_extend_two_letters():
    base = seed_system({0, 1}, 2)
    g = Word((1, -2))
    wit = assgp_extend(base, g)
    assert wit.k == 33 and wit.product() == g
    rep = wit.check(spot=10)
    assert rep.ok
    for idx in range(len(wit.factors)):
        for q in (-10, 3, 10):
            t = wit.power_certificate(idx, q)
            assert check_certificate(wit.system, t, 2) == power(wit.factors[idx].word, q)


def test_assgp_extend_rejects_foreign_letters():
    with pytest.raises(ValueError):
        assgp_extend(seed_system({0}, 1), Y)


def test_verify_assgp_pipeline():
    wit = assgp_extend(closure_seed({0}, 1, [X]), X)
    rep = verify_assgp(wit, samples=100)
    assert rep.ok, str(rep)
    assert rep.stats["max_letter_ratio"] <= 1


def test_g0_powers_stay_out_of_old_levels():
    wit = assgp_extend(seed_system({0}, 1), X)
    for q in (1, 2, -1):
        w = power(wit.g0, q)
        assert set(wit.fresh) <= lett(w)
        assert not isinstance(member_decide(wit.system.companion, 1, w), InWithCert)


def test_small_batteries():
    for rep in (sandwich_battery(200, 1), eta_battery(100, 1), retraction_battery(count=100),
                trace_battery(count=100)):
        assert rep.ok, str(rep)
