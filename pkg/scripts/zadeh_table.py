"""Fuse a family of two-source high-conflict scenarios on the 3-atom
powerset and print the resulting mass tables.

Each scenario has source 1 committed to a and source 2 committed to b,
with the remaining mass split between c and full ignorance.  As the
commitment approaches the infeasibility boundary the fused assignment
keeps both committed masses intact instead of collapsing onto the
residual hypothesis.  Run with --sweep for a finer grid.
"""

import argparse

from emrfuse import emr_fuse, powerset_algebra, zadeh_family_bbas


def fuse_row(algebra, a1, g1, b2, g2):
    m1, m2, _ = zadeh_family_bbas(a1, g1, b2, g2, algebra=algebra)
    outcome = emr_fuse(m1, m2)
    if not outcome.accepted:
        return None
    return {
        algebra.label(p): outcome.bba.mass(p)
        for p in algebra.lattice
        if outcome.bba.mass(p) > 0.0
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sweep", action="store_true",
        help="sweep the committed mass over a finer grid",
    )
    args = parser.parse_args()

    algebra = powerset_algebra("a", "b", "c")
    if args.sweep:
        params = [
            (round(0.05 * k, 2), 0.01, round(0.05 * k, 2), 0.01)
            for k in range(1, 11)
        ]
    else:
        params = [
            (0.499, 0.0, 0.499, 0.0),
            (0.3, 0.1, 0.3, 0.1),
            (0.3, 0.05, 0.3, 0.05),
            (0.3, 0.01, 0.3, 0.01),
            (0.501, 0.0, 0.501, 0.0),
        ]

    labels = ["a", "b", "c", "top"]
    header = "a1     g1     b2     g2     " + "".join(
        f"{label:>10}" for label in labels
    )
    print(header)
    print("-" * len(header))
    for a1, g1, b2, g2 in params:
        row = fuse_row(algebra, a1, g1, b2, g2)
        prefix = f"{a1:<7g}{g1:<7g}{b2:<7g}{g2:<7g}"
        if row is None:
            print(prefix + "  REJECTED (no conflict-free joint exists)")
        else:
            print(prefix + "".join(
                f"{row.get(label, 0.0):10.5f}" for label in labels
            ))


if __name__ == "__main__":
    main()
