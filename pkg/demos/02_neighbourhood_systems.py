"""Finite neighbourhood systems, certificates and exclusion proofs.

A seed system over {x0} with two levels is enriched by the cyclic subgroup
generated by a new letter x1.  Membership queries come back with a derivation
tree (checked independently) or with a replayable exclusion proof.

Run: python demos/02_neighbourhood_systems.py
"""
from assgp.systems import (
    InWithCert,
    check_certificate,
    check_exclusion,
    cyclic_enrich,
    is_extension,
    member_decide,
    seed_system,
    verify_system,
)
from assgp.trees import flatten, tree_to_json
from assgp.words import AlphabetRegistry

reg = AlphabetRegistry()
reg.seed(2)
base = seed_system({0}, 1)
v = cyclic_enrich(base, [reg.parse("x1")])
print("base:", base)
print("enriched:", v)

w = reg.parse("x0 x1^3 x0^-1")
verdict = member_decide(v, 0, w)
assert isinstance(verdict, InWithCert)
print(f"\n{reg.format(w)} in V_0, certificate:")
print(tree_to_json(verdict.tree))
print("factor sequence:", [reg.format(f) for f in flatten(verdict.tree).words])
print("checker recomputes:", reg.format(check_certificate(v, verdict.tree, 0)))

x0 = reg.parse("x0")
verdict = member_decide(v, 1, x0)
print(f"\nx0 in V_1? {type(verdict).__name__}, steps:", [s.tag for s in verdict.proof.steps])
check_exclusion(v, 1, x0, verdict.proof)
print("exclusion proof replays")

print()
print(verify_system(v, samples=300))
print(is_extension(v, base, samples=300))
