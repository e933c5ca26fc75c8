"""Sphere-token arithmetic and the connection criterion.

The bounded-solution index follows the verified sign pair; the origin
contributes the count of diffusion eigenvalues below the shifted coupling
spectrum.  A connecting orbit is predicted exactly when the two exponents
disagree.
"""

import numpy as np

import resodyn as rd

Sphere = rd.HomotopyType.sphere

# smash products act on tokens as exponent addition
print("Sphere(1) ^ Sphere(1) =", rd.wedge(Sphere(1), Sphere(1)))
print("Trivial ^ Sphere(3)   =", rd.wedge(rd.HomotopyType.trivial(), Sphere(3)))

# all four sign pairs on one count vector
cv = rd.CountVector(d_inf=2, n1=1, n2=3)
for s1 in "+-":
    for s2 in "+-":
        h, tag = rd.index_K_infinity(cv, s1, s2)
        print(f"signs ({s1},{s2}): h(K_inf) = {h}  [{tag}]")

# the desk system: arctan(40 u) at resonance with mu_1
basis = rd.build_basis(rd.Domain1D(1.0, 80), 32)
cfg = rd.ProblemConfig(m=1, l=1, lam=(float(basis.mu[0]),), sigma=(0.0,))
split = rd.classify(basis, cfg)
field = rd.make_field("arctan(40)", 1)
lin = rd.LinearizationData.from_field(field, cfg)
print("\ntheta =", np.round(lin.theta, 4), "(shifted coupling spectrum)")
print("nonresonant at the origin:", rd.nonresonance_at_origin(basis, lin))
d0 = rd.d_zero(basis, cfg, lin)
verdict = rd.connection_verdict(rd.counts(split), d0, "+", "vacuous", True)
print(f"d0 = {d0}; h(K_0) = {verdict.h_K_zero}; h(K_inf) = {verdict.h_K_infinity}")
print("connection predicted:", verdict.connection_predicted)
print(verdict.reason)

# negative control: weak coupling, no eigenvalue crossing
weak = rd.make_field("arctan(1)", 1)
lin_w = rd.LinearizationData.from_field(weak, cfg)
d0_w = rd.d_zero(basis, cfg, lin_w)
verdict_w = rd.connection_verdict(rd.counts(split), d0_w, "+", "vacuous", True)
print(f"\nweak coupling: d0 = {d0_w}, predicted = {verdict_w.connection_predicted}")
