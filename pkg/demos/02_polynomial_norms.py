#!/usr/bin/env python3
"""Steiner unimodular polynomials and their sup-norms on l_q balls.

A Steiner unimodular polynomial attaches a sign +-1 to every block of a
partial Steiner system with t = k-1; the blocks become the supports of its
monomials.  The interesting quantity is the supremum of |p| over unit balls
of different l_q norms: these polynomials have many terms but unusually
small sup-norms, which is what makes them useful as von Neumann inequality
counterexamples.
"""

from math import inf

from steinervn import (SteinerPolynomial, analytic_bounds, best_of_signs,
                       brute_force_norm, estimate_norm, ksz_polydisk_bound,
                       random_signs, skolem_construct)

system = skolem_construct(13)
p = SteinerPolynomial(system, random_signs(system, seed=7))
print(f"polynomial with {p.num_terms} terms in {p.n} variables, degree {p.k}")

# Certified lower bounds (multistart projected gradient ascent + witness
# recertification) at three exponents.
for q in (1.0, 2.0, inf):
    est = estimate_norm(p, q, starts=32, seed=0)
    print(f"  q={q}: estimated sup-norm {est.value:.6f}  "
          f"({est.starts} starts, {est.iterations} ascent iterations)")

# Analytic reference bounds for the same (k, q, n).
bounds = analytic_bounds(3, 2.0, 13)
print(f"\nanalytic l2 upper bound  M k K ln^(3/2) n = {bounds.ell2_upper:.3f}")
print(f"l1 ceiling 1/k! = {bounds.l1_upper:.6f}")
print(f"polydisk bound for full-size systems: {bounds.ksz_infty:.2f}")

# The probabilistic polydisk bound for the exact term count.
print(f"KSZ bound at |S|=26 terms: {ksz_polydisk_bound(13, 3, 26):.2f}")

# Searching over sign patterns: keep the pattern whose estimated norm is
# smallest (the winner is re-estimated at full budget).
winner, est = best_of_signs(system, q=inf, rounds=16, seed=3)
draws = [estimate_norm(SteinerPolynomial(system, random_signs(system, s)),
                       inf, starts=8, max_iters=300, seed=s).value for s in range(5)]
print(f"\nbest of 16 sign draws at q=inf: {est.value:.4f} "
      f"(five random draws spanned {min(draws):.2f}..{max(draws):.2f})")

# At tiny dimension an exhaustive oracle can confirm the ascent.
tiny = skolem_construct(7)
q_tiny = SteinerPolynomial(tiny, random_signs(tiny, 1))
ascent = estimate_norm(q_tiny, inf, starts=64, seed=0)
oracle = brute_force_norm(q_tiny, inf, 16)
print(f"\nn=7 cross-check: ascent {ascent.value:.6f} vs grid oracle {oracle.value:.6f}")
