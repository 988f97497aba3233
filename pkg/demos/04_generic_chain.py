"""A small generic chain and the topology oracle built from it.

Tasks meet dense sets in order: depth, alphabet, separation of each nontrivial
word, and ASSGP factorisation of each word at each level.  The oracle then
answers questions about the limit topology's identity neighbourhoods U_n.

Run: python demos/04_generic_chain.py
"""
import random

from assgp.canonical import sample_tree
from assgp.chain import ChainConfig, TopologyOracle, build_chain, default_schedule, run_suites
from assgp.systems import check_certificate
from assgp.words import AlphabetRegistry, inv, mul, words_up_to

reg = AlphabetRegistry()
schedule = default_schedule(reg, max_word_len=3, generators=2, max_depth=2)
state = build_chain(schedule, reg, config=ChainConfig(leq_samples=80, verify_samples=80))
for c in state.stages:
    print(f"stage {c.index}: {c.label:<22} |X| = {len(c.alphabet):<3} depth {c.depth}")

oracle = TopologyOracle(state)
g = reg.parse("x0 x1^-1")
sep = oracle.separation_witness(g)
oracle.replay_separation(sep)
print(f"\n{reg.format(g)} is outside U_{sep.level} ({sep.proof.tag}, stage {sep.stage})")

cert = oracle.assgp_certificate(g, 2, spot=5)
print(f"{reg.format(g)} = product of {len(cert.factors)} elements of Cyc(U_2);",
      f"{len(cert.certificates)} powers certified")

h = sample_tree(state.final, 2, random.Random(0))
t = oracle.conjugate_by(reg.parse("x1"), h)
print("x1 h x1^-1 certified in U_1:", check_certificate(state.final, t, 1) == mul(mul(reg.parse("x1"), h.word), inv(reg.parse("x1"))))

print()
print(run_suites(state, 80, 0, list(words_up_to([0, 1], 3)), [0, 1, 2], spot=5))
