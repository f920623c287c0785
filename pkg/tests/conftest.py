from hypothesis import strategies as st

from tautres.poly import MultiPoly, VarId, VarKind

VARS = [VarId(VarKind.THETA, 1, 1), VarId(VarKind.THETA, 1, 2), VarId(VarKind.LAMBDA, 0, 1),
        VarId(VarKind.CX, 1, 1), VarId(VarKind.CX, 1, 2)]

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, variables=VARS, max_terms=4, max_exp=3):
    out = MultiPoly.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        exps = {v: draw(st.integers(0, max_exp)) for v in draw(st.sets(st.sampled_from(variables), max_size=3))}
        out = out + MultiPoly.monomial(exps, coeff=draw(coefficients))
    return out
