"""Segre integrals as a generating series.

For a multiplicative class every partition term factors into connected pieces,
so the series of integrals is the exponential of the connected terms.  The
script prints both sides for P^2 and for a point.

    python3 walkthroughs/segre_series.py
"""
from tautres.chern import BundleSpec
from tautres.genfun import MultiplicativeClassSpec, series_coefficients
from tautres.tautint import projective_space_table

segre = MultiplicativeClassSpec.segre(10)

for d in (0, 1, 2):
    report = series_coefficients(segre, 2, BundleSpec(1), 4, projective_space_table(2, [d]))
    print(f"P^2, V = O({d})")
    for co in report.coefficients:
        print(f"  q^{co.k}: direct {co.direct_value!s:>10}  "
              f"exp(connected) {co.exponential_value!s:>10}  connected R_{co.k} = {co.connected_value}")

# on a point the connected terms are (-1)^(m-1) (m-1)!, so only q^0 and q^1 survive
point = series_coefficients(segre, 0, BundleSpec(1), 4)
print("point:", [str(co.direct.polynomial()) for co in point.coefficients])
