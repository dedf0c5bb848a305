"""
Stability and the exact scalars
===============================

Before anything is solved, a few numbers follow from balance arguments alone:
whether the network is stable, how often it is under repair, and how likely
it is to be empty while running.
"""

from coupledtandem.model import REFERENCE_PARAMS, empty_probability, load_profile, mode_probabilities

params = REFERENCE_PARAMS
print(params)

# partial loads lambda_k / nu_j and the slack left over
prof = load_profile(params)
print(f"load while operating {prof.rho0:.4f}, during repair {prof.rho1:.4f}, margin {prof.margin:.4f}")

# the environment alternates between operating and repair independently of the queues
up, down = mode_probabilities(params)
print(f"time operating {up:.6f}, under repair {down:.6f}")

# the empty probability is the margin spread over tau + gamma
print(f"P(empty, operating) = {empty_probability(params):.15f}  (7/24 = {7 / 24:.15f})")

# pushing the arrival rate up eventually eats the margin
for lam in (1.0, 1.5, 1.9, 2.0):
    m = load_profile(params.with_(lambda0=lam)).margin
    print(f"lambda0={lam}: margin {m:+.3f}", "stable" if m > 0 else "unstable")
