"""One strong-disorder walk end to end: W_n decay, endpoint mass, verdict.

The series J_n (max endpoint probability) and I_n (endpoint overlap) are the
localization witnesses: under strong disorder their Cesaro means stay bounded
away from zero while log W_n drifts linearly down.
"""

import numpy as np

from rwre_boundary.diagnostics import gap_estimate
from rwre_boundary.env import PerturbedFamily, uniform_alpha
from rwre_boundary.rates import criterion_report
from rwre_boundary.transfer import run_walk

EPS = 0.9
N = 100


def run():
    fam = PerturbedFamily(alpha=uniform_alpha(2))
    model = fam.model(EPS, seed=7)

    print(f"\n{'=' * 64}")
    print(f"  d=2 walk at eps={EPS}, n={N}, one environment (seed 7)")
    print(f"{'=' * 64}")
    series = run_walk(model, N)
    print("   n    log W_n      J_n      I_n   cesaro J   argmax")
    for n in (1, 5, 10, 25, 50, 100):
        rec = series.records[n - 1]
        print(
            f"  {n:3d}  {rec.log_w:+9.4f}  {rec.j:7.4f}  {rec.i:7.4f}  "
            f"{series.cesaro_j[n - 1]:9.4f}   {rec.argmax_site}"
        )
    assert series.cesaro_j[-1] > 0.05, "endpoint mass collapsed"
    print(f"  Cesaro J stays macroscopic ({series.cesaro_j[-1]:.3f}): PASSED")

    print(f"\n  replica spread of the free-energy gap (200 environments)")
    gap = gap_estimate(fam, EPS, N, 200, seed=7)
    print(f"  mean gap = {gap.mean_gap:+.6f}  stderr = {gap.stderr:.6f}")
    rep = criterion_report(fam, EPS, N, 200, seed=7)
    print(
        f"  inf I_a = {rep.inf_ia:.6f}  inf I_q ~ {rep.inf_iq_est:.6f}  "
        f"({rep.confidence_sigmas:.1f} stderr separation)"
    )
    print(f"  verdict: {rep.verdict}")
    assert rep.verdict == "localized"
    print("  strong-disorder verdict: PASSED")


if __name__ == "__main__":
    run()
