"""Equivariant integrals over Hilb^k(C^2).

With explicit torus weights the residue sum returns a rational function in
the weights; Atiyah-Bott over the monomial ideals of C[x, y] has to agree.

    python3 walkthroughs/equivariant_plane.py
"""
from tautres.chern import BundleSpec, parse_phi
from tautres.oracle import ab_integrate, affine_chart
from tautres.poly import MultiPoly, lam
from tautres.tautint import Mode, ProblemSpec, integrate_equivariant

l1, l2, v = (MultiPoly.var(lam(0, i)) for i in (1, 2, 3))

for k in (1, 2, 3):
    phi = parse_phi(f"c{k}")
    spec = ProblemSpec(2, k, BundleSpec(1, (v,)), phi, mode=Mode.EQUIVARIANT,
                       X=BundleSpec(2, (l1, l2)))
    ours = integrate_equivariant(spec).unordered.reduce()
    theirs = ab_integrate(affine_chart(1, l1, l2, [v]), k, phi).value
    same = (ours - theirs).reduce().num.is_zero()
    print(f"k={k}  c_top(V^[k]) = {ours}")
    print(f"      agrees with fixed-point sum: {same}")
