import random

import pytest

from assgp.canonical import sample_tree
from assgp.chain import (
    AlphabetTask,
    AssgpTask,
    ChainConfig,
    ChainState,
    DepthTask,
    Schedule,
    SepTask,
    TopologyOracle,
    build_chain,
    cover,
    default_schedule,
    leq,
    refine_alphabet,
    refine_assgp,
    refine_depth,
    refine_separate,
    run_suites,
    task_from_json,
    task_to_json,
)
from assgp.systems import (
    InWithCert,
    NotInProven,
    check_certificate,
    closure_seed,
    member_decide,
    seed_system,
)
from assgp.words import E, AlphabetRegistry, Word, inv, mul, words_up_to

X0, X1 = Word((1,)), Word((2,))
FAST = ChainConfig(leq_samples=60, verify_samples=60)


def two_letters() -> AlphabetRegistry:
    reg = AlphabetRegistry()
    reg.seed(2)
    return reg


def test_refine_depth():
    s = seed_system({0}, 0)
    q = refine_depth(s, 2)
    assert q.depth == 2 and all(isinstance(member_decide(q, i, E), InWithCert) for i in (1, 2))
    assert leq(q, s).ok
    deep = refine_depth(s, 3)
    assert refine_depth(deep, 1) is deep


def test_refine_alphabet():
    s = seed_system({0}, 1)
    q = refine_alphabet(s, {0, 1})
    assert q.alphabet == {0, 1} and q.levels[-1].cyclic == (X1,)
    assert refine_alphabet(q, {1}) is q
    assert leq(q, s).ok


def test_refine_separate():
    s = seed_system({0}, 0)
    q = refine_separate(s, X0)
    assert q.depth == 1
    v = member_decide(q, 1, X0)
    assert isinstance(v, NotInProven)
    assert leq(q, s).ok
    with pytest.raises(ValueError):
        refine_separate(s, E)


def test_refine_separate_grows_alphabet_first():
    s = seed_system({0}, 1)
    q = refine_separate(s, X1)
    assert 1 in q.alphabet
    assert isinstance(member_decide(q, q.depth, X1), NotInProven)
    assert leq(q, s).ok


def test_refine_assgp_from_small_seed():
    reg = AlphabetRegistry()
    reg.seed(1)
    state = ChainState(reg, seed_system({0}, 1), FAST)
    factors = refine_assgp(state, X0)
    wit = state.witnesses[X0]
    assert wit.k == 5 and len(factors) == 6
    assert mul(mul(mul(mul(mul(factors[0].word, factors[1].word), factors[2].word),
                       factors[3].word), factors[4].word), factors[5].word) == X0
    assert state.final.depth == 1 and state.ok


def test_refine_assgp_identity():
    reg = AlphabetRegistry()
    reg.seed(1)
    state = ChainState(reg, seed_system({0}, 1), FAST)
    (f,) = refine_assgp(state, E)
    assert f.word == E and len(state.stages) == 1


def test_leq_negative_control():
    assert leq(seed_system({0}, 0), seed_system({0}, 0)).ok
    assert not leq(seed_system({3}, 0), seed_system({0}, 0)).ok


def test_empty_schedule():
    state = build_chain([], config=FAST)
    assert len(state.stages) == 1 and state.log == []


def test_depth_then_separate():
    state = build_chain([DepthTask(1), SepTask(X0)], config=FAST)
    assert 2 <= len(state.stages) <= 3
    top = state.final
    assert isinstance(member_decide(top, top.depth, X0), NotInProven)
    oracle = TopologyOracle(state)
    assert isinstance(oracle.u_member(X0, 1), NotInProven)
    wit = oracle.separation_witness(X0)
    oracle.replay_separation(wit)


def test_assgp_task_lands_in_intersection():
    state = build_chain([AssgpTask(X0, 1)], config=FAST)
    assert state.final.depth >= 1
    oracle = TopologyOracle(state)
    cert = oracle.assgp_certificate(X0, 1)
    assert cert.product() == X0 and len(cert.factors) == 6
    for f in cert.factors[:-1]:
        assert isinstance(oracle.u_member(f.word, 1), InWithCert)
    assert state.ok


def test_unregistered_task_rejected():
    with pytest.raises(ValueError):
        build_chain([AlphabetTask(frozenset({7}))], config=FAST)


def test_oracle_queries():
    state = build_chain([DepthTask(2), SepTask(X0), SepTask(X1), AssgpTask(X0, 1)], two_letters(),
                        config=FAST)
    oracle = TopologyOracle(state)
    for n in range(state.final.depth + 1):
        assert isinstance(oracle.u_member(E, n), InWithCert)
    with pytest.raises(ValueError):
        oracle.u_member(E, -1)
    with pytest.raises(ValueError):
        oracle.separation_witness(E)
    assert oracle.separation_witness(mul(X0, X1)) is None
    a, b = oracle.separation_witness(X0), oracle.separation_witness(X1)
    assert a.proof is not b.proof
    assert oracle.assgp_certificate(X1, 1) is None
    assert oracle.conjugation_level(X0, 2) == 3
    assert oracle.conjugation_level(E, 2) == 2


def test_conjugation_by_word():
    state = build_chain([DepthTask(3), AlphabetTask(frozenset({0, 1})), AssgpTask(X0, 3)],
                        two_letters(), config=FAST)
    oracle = TopologyOracle(state)
    rng = random.Random(2)
    g = mul(X0, inv(X1))
    for _ in range(50):
        h = sample_tree(state.final, 3, rng)
        t = oracle.conjugate_by(X0, h)
        assert check_certificate(state.final, t, 2) == mul(mul(X0, h.word), inv(X0))
        h = sample_tree(state.final, 2 + 1, rng)
        t = oracle.conjugate_by(g, h)
        assert check_certificate(state.final, t, 1) == mul(mul(g, h.word), inv(g))


def test_cover_over_letters():
    state = build_chain([DepthTask(1), AlphabetTask(frozenset({0, 1})), AssgpTask(X0, 1)],
                        two_letters(), config=FAST)
    idx = state.tail.index
    factors = cover(state, idx, mul(X1, inv(X0)))
    assert factors is not None
    w = E
    for f in factors:
        w = mul(w, f.word)
    assert w == mul(X1, inv(X0))


def test_small_default_schedule_suites():
    reg = AlphabetRegistry()
    sched = default_schedule(reg, max_word_len=2, generators=2, max_depth=2)
    state = build_chain(sched, reg, config=FAST)
    words = list(words_up_to([0, 1], 2))
    rep = run_suites(state, 60, 0, words, [0, 1, 2], spot=4)
    assert state.ok and rep.ok, str(rep)


def test_task_json_roundtrip():
    reg = AlphabetRegistry()
    reg.seed(2)
    for t in (DepthTask(3), AlphabetTask(frozenset({0, 1})), SepTask(mul(X0, inv(X1))), AssgpTask(X1, 2)):
        assert task_from_json(task_to_json(t, reg), reg) == t
    sched = default_schedule(AlphabetRegistry(), 2, 2, 1)
    again = Schedule.from_json(sched.to_json(reg), AlphabetRegistry())
    assert again.tasks == sched.tasks


def test_seed_system_override():
    base = closure_seed({0}, 1, [X0])
    state = build_chain([SepTask(X0)], seed_system_=base, config=FAST)
    assert state.stages[0].system is base
    assert state.ok
