"""Tautological integrals on Hilb^k(P^2) for a line bundle O(d).

The residue sum produces a universal polynomial in Chern numbers of the base and
the bundle.  Plugging in P^2 data gives a number, which we compare with torus
localization over monomial ideals.

    python3 walkthroughs/p2_two_and_three_points.py
"""
from tautres.chern import BundleSpec, parse_phi
from tautres.oracle import compact_integral, p2_chart
from tautres.tautint import ProblemSpec, integrate_ghilb, monomial_label, projective_space_table

for k, phi_text in ((2, "c1^4"), (2, "c2^2"), (3, "c1^6"), (3, "c3^2")):
    phi = parse_phi(phi_text)
    universal = integrate_ghilb(ProblemSpec(2, k, BundleSpec(1), phi))
    print(f"k={k}  phi={phi_text}  (Chern-number coefficients, ordered points)")
    numbers = universal.chern_numbers()
    for key in sorted(numbers, key=monomial_label):
        print(f"    {monomial_label(key):>28}  {numbers[key]}")
    for d in (0, 1, 2, 3):
        table = projective_space_table(2, [d])
        ours = integrate_ghilb(ProblemSpec(2, k, BundleSpec(1), phi), table).total
        theirs = compact_integral(lambda w: p2_chart([d], w), k, phi)
        print(f"    O({d}):  residue sum {ours!s:>8}   localization {theirs!s:>8}")
    print()
