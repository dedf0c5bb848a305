"""
Expanding in the coupling share
===============================

For small p the operating-mode pgf is a power series in p whose coefficients
V_m(x, y) follow from one another by dividing out the linear p = 0 kernel.
Each V_m is a polynomial in y, which keeps the recursion exact in y.
"""

from coupledtandem.model import REFERENCE_PARAMS
from coupledtandem.oracle import oracle_metrics, solve
from coupledtandem.psa import psa_metrics, solution_for

sol = solution_for(REFERENCE_PARAMS)

# V_0 carries all the probability mass; the corrections add none and leave the empty state alone
print("V_0(1,1) =", sol.v_jet(0, (1, 1), (0, 0)).value.real)
for m in range(1, 5):
    print(f"V_{m}(0,0) = {abs(sol.v_jet(m, (0, 0), (0, 0)).value):.1e}   "
          f"V_{m}(1,1) = {abs(sol.v_jet(m, (1, 1), (0, 0)).value):.1e}")

# the series converges quickly near p = 0 and slows down as p grows
for p in (0.05, 0.1, 0.3):
    params = REFERENCE_PARAMS.with_(p=p)
    truth = oracle_metrics(solve(params))
    print(f"\np = {p}  (ctmc E[Q1] = {truth.EQ1:.8f})")
    for M in (0, 1, 3, 5, 8):
        r = psa_metrics(params, M)
        print(f"  M={M}: E[Q1] = {r.EQ1:.8f}  relative error {abs(r.EQ1 - truth.EQ1) / truth.EQ1:.1e}")
