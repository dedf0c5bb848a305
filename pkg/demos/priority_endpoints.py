"""
The two priority systems
========================

At p = 0 station 2 takes all capacity whenever it is busy; at p = 1 station 1
does.  Both cases solve in closed form, and their means bound the range that
the coupled system sweeps through as p moves from 0 to 1.
"""

from coupledtandem.closedform import closedform_metrics, p0_pi0, p0_variant, p1_pi0
from coupledtandem.model import REFERENCE_PARAMS
from coupledtandem.oracle import oracle_metrics, pgf_from_table, solve

params = REFERENCE_PARAMS

for which, p, pgf in (("p0", 0.0, p0_pi0), ("p1", 1.0, p1_pi0)):
    table = solve(params.with_(p=p))
    truth = oracle_metrics(table)
    EQ1, EQ2 = closedform_metrics(which, params)
    print(f"p={p}: E[Q1]={EQ1:.12f} (ctmc {truth.EQ1:.12f})  E[Q2]={EQ2:.12f} (ctmc {truth.EQ2:.12f})")
    worst = max(abs(pgf(x, y, params) - pgf_from_table(table, x, y)) for x in (0.2, 0.5, 0.8)
                for y in (0.2, 0.5, 0.8))
    print(f"      largest pgf gap on a 3x3 grid {worst:.1e}")

# a sign slip in the boundary term is easy to make and easy to catch
table = solve(params.with_(p=0.0))
print("correct  ", p0_pi0(0.5, 0.5, params).real)
print("sign slip", p0_variant(0.5, 0.5, params).real)
print("ctmc     ", pgf_from_table(table, 0.5, 0.5).real)
