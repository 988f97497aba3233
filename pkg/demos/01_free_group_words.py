"""Free-group arithmetic on reduced words.

Run: python demos/01_free_group_words.py
"""
from assgp.words import AlphabetRegistry, cyclic_member, cyclic_root, inv, lett, mul, power, split_cancellation

reg = AlphabetRegistry()
reg.seed(3)
x0, x1 = reg.parse("x0"), reg.parse("x1")

v, w = reg.parse("x0 x1"), reg.parse("x1^-1 x0")
print("v =", reg.format(v), "  w =", reg.format(w))
print("v * w =", reg.format(mul(v, w)))

s = split_cancellation(v, w)
print("cancellation split:", [reg.format(p) for p in (s.v_prefix, s.v_suffix, s.w_prefix, s.w_suffix)])

c = reg.parse("x0 x1 x1 x0^-1")
root = cyclic_root(c)
print(f"{reg.format(c)} = u d u^-1 with u = {reg.format(root.conjugator)}, d = {reg.format(root.core)}")
h = power(reg.parse("x0 x1 x0^-1"), 5)
print(f"{reg.format(h)} is power {cyclic_member(h, reg.parse('x0 x1 x0^-1'))} of x0 x1 x0^-1")

print("letters of x0 x2^-1 x0:", sorted(reg[i].name for i in lett(reg.parse("x0 x2^-1 x0"))))
print("inverse of x0 x1^-1:", reg.format(inv(reg.parse("x0 x1^-1"))))
