"""The face-point localization certificate at d=4.

At the skewed direction y = (0.97, 0.01, 0.01, 0.01) the path entropy f(y)
is small enough that a Hoeffding bound on the best achievable disorder sum
beats the annealed site mean once eps is large: bound_margin(eps) < 0 then
certifies inf I_a < inf I_q analytically, with no Monte Carlo error.  The
exact last-passage maxima over independent environments illustrate how much
slack the concentration step leaves.
"""

from rwre_boundary.sweep import bound_margin, entropy, example_d4_verify

Y = (0.97, 0.01, 0.01, 0.01)


def run():
    f_y = entropy(Y)
    print(f"\n{'=' * 64}")
    print(f"  certificate at y = {Y}")
    print(f"{'=' * 64}")
    print(f"  path entropy f(y) = {f_y:.6f} (needs <= 0.18)")

    print("\n    eps    margin     verdict")
    for eps in (0.5, 0.7, 0.9, 0.95):
        m = bound_margin(eps, f_y)
        verdict = "certified-localized" if m < 0 else "inconclusive"
        print(f"   {eps:4.2f}  {m:+9.5f}   {verdict}")

    rep = example_d4_verify(Y, 0.95, n_steps=400, seeds=50, seed=0)
    print(f"\n  exact last-passage check at eps=0.95, n=400, 50 environments:")
    print(f"    site mean mu        = {rep.mu:+.5f}")
    print(f"    Hoeffding radius a* = {rep.a_star:.5f}")
    print(f"    threshold mu + a*   = {rep.lpp_threshold:+.5f}")
    print(f"    best path value     = {max(rep.lpp_values):+.5f} (mean {rep.lpp_mean:+.5f})")
    print(f"    within threshold    = {rep.frac_within:.0%}")
    assert rep.verdict == "certified-localized"
    assert rep.frac_within >= 0.95
    print(f"  verdict: {rep.verdict}: PASSED")

    weak = example_d4_verify(Y, 0.5, n_steps=100, seeds=10, seed=0)
    assert weak.verdict == "inconclusive"
    print(f"  eps=0.5 margin {weak.bound_margin:+.5f} proves nothing: PASSED")


if __name__ == "__main__":
    run()
