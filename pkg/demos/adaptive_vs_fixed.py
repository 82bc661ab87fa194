"""Sequential single-copy measurement: does adapting the axis help?

Compares three ways to spend N copies on the equatorial ensemble:
  1. the fixed x/y split, evaluated exactly (the reference),
  2. the same fixed policy as a Monte Carlo experiment (sanity: these two
     must agree within sampling error, and the policy simulation is the
     same code path as the static Monte Carlo evaluator),
  3. a greedy policy that, before each copy, picks the equatorial axis
     whose expected posterior fidelity gain is largest.

Usage: python3 demos/adaptive_vs_fixed.py [--n 12] [--samples 4000] [--seed 7]
"""

from __future__ import annotations

import argparse

from blochest.core import PriorKind, build_prior
from blochest.evaluator import adaptive_local_fidelity, exact_fidelity
from blochest.schemes import SchemeKind, SchemeSpec

RADIAL_ORDER = 128
ANGULAR_ORDER = 256


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=12, help="copies (even)")
    parser.add_argument("--samples", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    prior = build_prior(PriorKind.EQUATORIAL_BURES, RADIAL_ORDER, ANGULAR_ORDER)
    exact = exact_fidelity(
        SchemeSpec(SchemeKind.LOCAL_XY, args.n), "optimal", prior,
        radial_order=RADIAL_ORDER, angular_order=ANGULAR_ORDER,
    )
    fixed = adaptive_local_fidelity(prior, args.n, "fixed-xy", args.samples, args.seed)
    greedy = adaptive_local_fidelity(
        prior, args.n, "greedy-fidelity", args.samples, args.seed
    )

    print(f"N = {args.n} copies, {args.samples} Monte Carlo samples, seed {args.seed}")
    print("-" * 64)
    print(f"fixed x/y split, exact          F = {exact.fidelity:.8f}")
    print(
        f"fixed x/y split, Monte Carlo    F = {fixed.fidelity:.8f}"
        f" ± {fixed.stderr:.6f}"
    )
    print(
        f"greedy axis choice, Monte Carlo F = {greedy.fidelity:.8f}"
        f" ± {greedy.stderr:.6f}"
    )
    print("-" * 64)
    z_fixed = abs(fixed.fidelity - exact.fidelity) / fixed.stderr
    gain = greedy.fidelity - exact.fidelity
    z_gain = gain / greedy.stderr
    print(f"fixed-policy consistency: z = {z_fixed:.2f} against the exact value")
    print(f"greedy minus fixed-exact: {gain:+.6f}  ({z_gain:+.2f} standard errors)")
    print(
        "\nGreedy adaptation reshuffles which axis each copy is spent on but\n"
        "keeps single-copy equatorial projections, so its average lands at\n"
        "the fixed-split level — any gain is at the edge of Monte Carlo\n"
        "resolution at these sample counts, not a rate change."
    )


if __name__ == "__main__":
    main()
