"""Show that the entropy-maximizing rule is not associative.

Three sources on a binary frame: two back hypothesis a with half their
mass, the third backs the negation.  Fusing left-to-right fails (the
intermediate result is too committed to coexist with the third source)
while fusing right-to-left succeeds, so grouping is a modelling choice.
The simultaneous three-way fusion is also shown for reference.
"""

from emrfuse import Bba, build_algebra, emr_fuse, emr_fuse_n


def show(title, outcome):
    print(title)
    if not outcome.accepted:
        print(f"  REJECTED: {outcome.rejection.message}")
        return
    algebra = outcome.bba.algebra
    for prop in algebra.lattice:
        if outcome.bba.mass(prop) > 0.0:
            print(f"  m({algebra.label(prop)}) = {outcome.bba.mass(prop):.6f}")


def main():
    algebra = build_algebra(["a", "na"], ["a&na = bot", "a|na = top"])
    m1 = Bba.from_masses(algebra, {"a": 0.5, "top": 0.5})
    m2 = Bba.from_masses(algebra, {"a": 0.5, "top": 0.5})
    m3 = Bba.from_masses(algebra, {"na": 0.5, "top": 0.5})
    for name, m in (("m1", m1), ("m2", m2), ("m3", m3)):
        masses = {algebra.label(p): v for p, v in m.masses.items() if v}
        print(f"{name}: {masses}")
    print()

    left_inner = emr_fuse(m1, m2)
    show("(m1 * m2):", left_inner)
    if left_inner.accepted:
        show("(m1 * m2) * m3:", emr_fuse(left_inner.bba, m3))
    print()

    right_inner = emr_fuse(m2, m3)
    show("(m2 * m3):", right_inner)
    if right_inner.accepted:
        show("m1 * (m2 * m3):", emr_fuse(m1, right_inner.bba))
    print()

    show("simultaneous [m1, m2, m3]:", emr_fuse_n([m1, m2, m3]))


if __name__ == "__main__":
    main()
