#!/usr/bin/env python3
"""Partial Steiner systems: exact constructions, greedy packings, density.

A partial Steiner system S_p(t, k, n) is a family of k-subsets of
{0,...,n-1} in which every t-subset appears in at most one member.  For
triples (t=2, k=3) exact systems -- every pair in exactly one block --
exist precisely when n = 1 or 3 (mod 6), and we build them directly.
Everything else falls back to a seeded random greedy packing.
"""

from steinervn import (bose_construct, density_report, greedy_construct,
                       is_exact_cover, skolem_construct, verify)

# --- exact triple systems ---------------------------------------------------

sts9 = bose_construct(9)       # n = 3 (mod 6)
sts13 = skolem_construct(13)   # n = 1 (mod 6)

print("STS(9): ", sts9.num_blocks, "blocks, exact cover:", is_exact_cover(sts9))
print("blocks:", list(sts9.blocks))
print("STS(13):", sts13.num_blocks, "blocks, exact cover:", is_exact_cover(sts13))

# The smallest nontrivial case, n = 7, is the Fano plane (up to relabeling).
fano = skolem_construct(7)
print("STS(7): ", list(fano.blocks))

# --- greedy packings for inadmissible n -------------------------------------

# n = 20 admits no exact triple system; the greedy still packs most pairs.
packing = greedy_construct(20, 3, seed=0)
ok, _ = verify(packing)
report = density_report(packing)
print(f"\ngreedy S_p(2,3,20): {report['cardinality']} blocks of ceiling "
      f"{report['ceiling']:.1f} (fill {report['fill_ratio']:.3f}), verified: {ok}")

# Quadruple systems with t = 3 work the same way.
quads = greedy_construct(16, 4, seed=1)
report4 = density_report(quads)
print(f"greedy S_p(3,4,16): {report4['cardinality']} blocks "
      f"(fill {report4['fill_ratio']:.3f})")

# The reported psi_target is the near-optimal packing cardinality suggested
# by the probabilistic existence results, with an unspecified constant taken
# as 1; it is a reference point, not a promise, and the asymptotic formula
# is vacuous (even negative) at small n.
print(f"reference target for S_p(2,3,20): {report['psi_target']:.1f} "
      "(asymptotic formula, vacuous this small)")
