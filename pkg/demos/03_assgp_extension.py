"""The ASSGP extension step.

Over X = {x0} with depth 1, the element x0 becomes a product of elements whose
whole cyclic subgroups lie in the bottom level.  It takes k = |X| * 4^1 + 1 = 5
fresh letters y1..y5 and g0 = y1 y2 y3 y4 y5 x0.  Then
x0 = y5^-1 y4^-1 y3^-1 y2^-1 y1^-1 g0.  The companion system (enriched by the
fresh letters only) never contains a nontrivial power of g0, which is what
keeps the Hausdorff separations alive.

Run: python demos/03_assgp_extension.py
"""
import random

from assgp.canonical import eta_collapse, sample_tree
from assgp.lemmas import assgp_extend, eta_equality, eta_instance_from_tree, verify_assgp
from assgp.systems import check_certificate, seed_system
from assgp.words import AlphabetRegistry

reg = AlphabetRegistry()
reg.seed(1)
x0 = reg.parse("x0")
wit = assgp_extend(seed_system({0}, 1), x0, reg, stage=1)
print(f"k = {wit.k}, g0 = {reg.format(wit.g0)}")
print("factors:", " * ".join(reg.format(f.word) for f in wit.factors))
print("product:", reg.format(wit.product()))

for q in (-3, 7):
    t = wit.power_certificate(len(wit.factors) - 1, q, level=0)
    print(f"g0^{q} certified at level 0: {len(check_certificate(wit.system, t, 0))} letters")

rng = random.Random(4)
for _ in range(2000):
    t = sample_tree(wit.system, 0, rng, max_exponent=2, conj_prob=1.0, bridge_prob=0.9, focus=(wit.g0,))
    inst = eta_instance_from_tree(t, wit)
    if inst and any(inst[2] in set(abs(c) - 1 for c in a) for a in inst[0]):
        break
factors, g0, letter = inst
res = eta_equality(factors, g0, letter)
print(f"\ncollapse instance with {len(factors)} factors: sides equal = {res.holds}")
collapsed = eta_collapse(t, wit.system)
print("collapsed tree certifies", reg.format(check_certificate(wit.system.companion, collapsed, 0)),
      "in the companion; original word", reg.format(t.word))

print()
print(verify_assgp(wit, samples=150))
