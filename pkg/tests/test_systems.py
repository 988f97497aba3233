import random

import pytest

from assgp.canonical import sample_tree
from assgp.systems import (
    InWithCert,
    NotInProven,
    SearchBudget,
    Unknown,
    check_certificate,
    check_exclusion,
    closure_seed,
    cyclic_enrich,
    enrich,
    identity_certificate,
    is_extension,
    lift,
    member_decide,
    pad_extend,
    seed_system,
    system_bundle,
    system_from_manifests,
    verify_system,
)
from assgp.trees import CertificateError, Conj, CyclicPower, LeafExplicit, conj_node, cyclic_leaf, invert_tree
from assgp.words import E, Word, inv, mul, power

X0, Y = Word((1,)), Word((2,))


def test_seed_levels():
    s = seed_system({0}, 0)
    assert s.depth == 0 and s.levels[0].explicit == {E}
    s2 = seed_system({0, 1}, 2)
    assert s2.depth == 2 and all(lv.explicit == {E} for lv in s2.levels)
    for i in range(3):
        assert isinstance(member_decide(s2, i, E), InWithCert)


def test_seed_rejects_empty_alphabet():
    with pytest.raises(ValueError):
        seed_system(set(), 0)


def test_enrichment_example():
    v = cyclic_enrich(seed_system({0}, 1), [Y])
    assert v.alphabet == {0, 1}
    # V_1 = {e} ∪ <y>
    for q in range(-5, 6):
        assert isinstance(member_decide(v, 1, power(Y, q)), InWithCert)
    # x y y^2 x^-1 at level 0
    w = mul(mul(X0, power(Y, 3)), inv(X0))
    verdict = member_decide(v, 0, w)
    assert isinstance(verdict, InWithCert)
    t = verdict.tree
    assert isinstance(t, Conj) and t.conjugator == X0
    assert check_certificate(v, t, 0) == w


def test_conj_tree_shape_for_x_y2_xinv():
    v = cyclic_enrich(seed_system({0}, 1), [Y])
    w = mul(mul(X0, power(Y, 2)), inv(X0))
    t = member_decide(v, 0, w, SearchBudget(max_exponent=3)).tree
    assert isinstance(t, Conj) and t.conjugator == X0
    assert (t.left.word, t.right.word) == (Y, Y)


def test_old_letter_excluded_by_recursion():
    v = cyclic_enrich(seed_system({0}, 1), [Y])
    verdict = member_decide(v, 1, X0)
    assert isinstance(verdict, NotInProven)
    assert verdict.proof.tag == "condition-(iii)-recursion"
    assert verdict.proof.steps[-1].tag == "explicit-miss"
    check_exclusion(v, 1, X0, verdict.proof)


def test_exclusion_replay_detects_tampering():
    v = cyclic_enrich(seed_system({0}, 1), [Y])
    proof = member_decide(v, 1, X0).proof
    with pytest.raises(CertificateError):
        check_exclusion(v, 1, mul(X0, X0), proof)


def test_empty_enrichment_grows_by_recursion_only():
    base = closure_seed({0}, 1, [X0])
    v = enrich(base)
    for i in range(2):
        for w in base.levels[i].explicit:
            assert isinstance(member_decide(v, i, w), InWithCert)
    assert verify_system(v, 200).ok


def test_sampled_symmetry_of_enrichment():
    v = cyclic_enrich(closure_seed({0}, 2, [X0]), [Y])
    rng = random.Random(1)
    for _ in range(200):
        i = rng.randrange(3)
        t = sample_tree(v, i, rng)
        assert check_certificate(v, invert_tree(t), i) == inv(t.word)


def test_cyclic_leaf_certificate():
    v = cyclic_enrich(seed_system({0}, 2), [Y])
    for q in (-7, 0, 3, 12):
        assert check_certificate(v, cyclic_leaf(2, Y, q), 2) == power(Y, q)


def test_padding():
    base = seed_system({0}, 0)
    p = pad_extend(base, 2)
    assert p.depth == 2
    for i in (1, 2):
        assert isinstance(member_decide(p, i, E), InWithCert)
        assert isinstance(member_decide(p, i, X0), NotInProven)
    assert isinstance(member_decide(p, 0, E), InWithCert)
    with pytest.raises(ValueError):
        pad_extend(p, 2)


def test_padding_keeps_old_levels():
    base = closure_seed({0}, 1, [X0])
    p = pad_extend(base, 3)
    for i in range(2):
        for w in base.levels[i].explicit:
            assert isinstance(member_decide(p, i, w), InWithCert)


def test_verify_system_seeds_and_enrichments():
    for s in (seed_system({0}, 0), seed_system({0, 1}, 2), closure_seed({0}, 2, [X0])):
        assert verify_system(s).ok
    rep = verify_system(cyclic_enrich(closure_seed({0}, 1, [X0]), [Y]), 300)
    assert rep.ok


def test_verify_system_reports_missing_inverse():
    bad = seed_system({0, 1}, 0, [[E, X0]])
    rep = verify_system(bad)
    assert not rep.ok
    assert any(e.tag.startswith("(2_U)") for e in rep.failures())


def test_verify_system_reports_closure_violation():
    bad = seed_system({0}, 1, [[E], [E, X0, inv(X0)]])
    rep = verify_system(bad)
    assert [e.tag for e in rep.failures()] == ["(3_U) exhaustive on explicit levels"]


def test_is_extension_positive_and_negative():
    base = closure_seed({0}, 1, [X0])
    assert is_extension(cyclic_enrich(base, [Y]), base, 300).ok
    assert is_extension(pad_extend(base, 3), base, 300).ok
    rep = is_extension(base, pad_extend(base, 3))
    assert not rep.ok
    assert any(e.tag.startswith("(ii)") for e in rep.failures())
    other = seed_system({5}, 0)
    rep = is_extension(other, base)
    assert any(e.tag.startswith("(i)") for e in rep.failures())


def test_lift_and_identity_certificates():
    base = closure_seed({0}, 1, [X0])
    v = pad_extend(cyclic_enrich(base, [Y]), 2)
    for i in range(2):
        for w in base.levels[i].explicit:
            t = LeafExplicit(i, w)
            assert check_certificate(v, lift(t, base, v), i) == w
    for i in range(3):
        assert check_certificate(v, identity_certificate(v, i), i) == E


def test_checker_rejects_wrong_words():
    v = cyclic_enrich(seed_system({0}, 1), [Y])
    with pytest.raises(CertificateError):
        check_certificate(v, CyclicPower(1, Y, 2, Y), 1)
    with pytest.raises(CertificateError):
        check_certificate(v, LeafExplicit(1, X0), 1)
    good = conj_node(0, X0, cyclic_leaf(1, Y, 1), cyclic_leaf(1, Y, 1))
    with pytest.raises(CertificateError):
        check_certificate(v, good, 1)  # wrong level


def test_unknown_verdicts_name_their_cause():
    v = cyclic_enrich(closure_seed({0}, 2, [X0]), [Y])
    w = Word((1, 2, 1, 2, -1, 2, -1, -1))
    tiny = member_decide(v, 0, w, SearchBudget(max_nodes=3))
    assert isinstance(tiny, Unknown) and tiny.spent > 3 and "exhausted" in tiny.reason
    full = member_decide(v, 0, w)
    assert isinstance(full, Unknown) and "neither" in full.reason


def test_manifest_roundtrip():
    s = pad_extend(enrich(closure_seed({0}, 1, [X0]), words=[Word((2, 3))], cyclic=[Y]), 2)
    again = system_from_manifests(system_bundle(s))
    assert again.hash == s.hash


def test_corrupted_manifest_rejected():
    s = cyclic_enrich(seed_system({0}, 1), [Y])
    bundle = system_bundle(s)
    bundle[-1]["levels"][1]["cyclic"] = [[2, -2]]
    with pytest.raises(ValueError):
        system_from_manifests(bundle)
