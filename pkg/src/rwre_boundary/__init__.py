"""Localization diagnostics for directed walks in i.i.d. random environments.

The package computes, exactly where possible and by replica Monte Carlo
otherwise, the standard observables of a nearest-neighbor walk conditioned
to reach the boundary slice {x >= 0, |x|_1 = n}: the normalized
boundary-crossing martingale W_n, the endpoint concentration series J_n and
I_n with their Cesaro means, the quenched/annealed free-energy gap, exact
two-replica second moments E[W_n^2], boundary rate functions, and
epsilon-phase sweeps for perturbed environment families.
"""

__version__ = "0.1.0"
