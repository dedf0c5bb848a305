"""
How breakdowns load the second station
======================================

Breakdowns stop service but not arrivals, so more frequent breakdowns leave
more work behind.  A sweep over gamma at a fixed share shows the mean length
of queue 2 growing, by the truncated series and by the chain.
"""

from coupledtandem.model import REFERENCE_PARAMS
from coupledtandem.oracle import oracle_metrics, solve
from coupledtandem.psa import psa_metrics

print("gamma   series(M=3)   ctmc")
for gamma in (0.5, 1.0, 2.0, 3.0, 4.0):
    params = REFERENCE_PARAMS.with_(p=0.2, gamma=gamma)
    approx = psa_metrics(params, 3).EQ2
    exact = oracle_metrics(solve(params)).EQ2
    print(f"{gamma:5.1f}   {approx:.6f}      {exact:.6f}")

# the same sweep is available from the command line:
#   python -m coupledtandem sweep --sweep-var gamma --from 1 --to 3 --steps 3 --p 0.2 --methods psa,ctmc --M-values 3
