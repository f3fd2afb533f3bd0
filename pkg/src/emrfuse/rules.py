"""Classical fusion rules: the conjunctive function, TBM fusion, the
insulation-guarded conflict-free rule, and conflict redistribution
(Dempster-Shafer as the mass-proportional special case)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .algebra import MixedAlgebraError, PreBooleanAlgebra, Proposition, meet
from .belief import Bba, validate

_SUM_TOL = 1e-9


class RuleError(ValueError):
    """Invalid rule application."""


class InsulationError(RuleError):
    """The algebra admits a conflict; the conflict-free conjunctive rule
    does not apply."""


class TotalConflictError(RuleError):
    """The conjunctive conflict is 1; normalization is undefined."""


@dataclass(frozen=True)
class ConjunctiveImage:
    """The raw product-convolution of two bbas under meet, before any
    conflict handling."""

    algebra: PreBooleanAlgebra
    mu: Mapping[Proposition, float]

    @property
    def conflict(self) -> float:
        return self.mu.get(self.algebra.bot, 0.0)


@dataclass(frozen=True)
class Redistribution:
    """A normalized, nonnegative reallocation of the conflict mass over
    non-bot propositions.  Negative redistributions are not supported."""

    algebra: PreBooleanAlgebra
    rho: Mapping[Proposition, float]

    def check(self) -> None:
        if self.rho.get(self.algebra.bot, 0.0) != 0.0:
            raise RuleError("redistribution puts weight on bot")
        if any(v < 0 for v in self.rho.values()):
            raise RuleError("redistribution weights must be nonnegative")
        total = sum(self.rho.values())
        if abs(total - 1.0) > _SUM_TOL:
            raise RuleError(f"redistribution weights sum to {total!r}, not 1")

    @classmethod
    def on_top(cls, algebra: PreBooleanAlgebra) -> "Redistribution":
        """Send all conflict to top (Yager-style)."""
        return cls(algebra, {algebra.top: 1.0})

    @classmethod
    def proportional(cls, image: ConjunctiveImage) -> "Redistribution":
        """Spread the conflict proportionally to the off-bot conjunctive
        masses; redistributing with this reproduces Dempster-Shafer."""
        off = {
            p: v for p, v in image.mu.items() if not p.is_bot and v != 0.0
        }
        total = sum(off.values())
        if total <= 0:
            raise TotalConflictError("all conjunctive mass sits on bot")
        return cls(image.algebra, {p: v / total for p, v in off.items()})


def _check_pair(bba1: Bba, bba2: Bba) -> PreBooleanAlgebra:
    if bba1.algebra is not bba2.algebra:
        raise MixedAlgebraError("bbas are defined over different algebras")
    for b in (bba1, bba2):
        report = validate(b)
        if not report.ok:
            raise RuleError("invalid bba: " + "; ".join(report.errors))
    return bba1.algebra


def conjunctive(bba1: Bba, bba2: Bba) -> ConjunctiveImage:
    """mu(phi) = sum of m1(psi) * m2(eta) over focal pairs with
    meet(psi, eta) = phi; the conflict is mu(bot)."""
    algebra = _check_pair(bba1, bba2)
    mu: dict[Proposition, float] = {}
    for psi, v1 in bba1.masses.items():
        if v1 == 0.0:
            continue
        for eta, v2 in bba2.masses.items():
            if v2 == 0.0:
                continue
            phi = meet(psi, eta)
            mu[phi] = mu.get(phi, 0.0) + v1 * v2
    return ConjunctiveImage(algebra, mu)


def tbm_fuse(bba1: Bba, bba2: Bba) -> Bba:
    """Conjunctive fusion keeping the bot mass (TBM-like result)."""
    image = conjunctive(bba1, bba2)
    return Bba(image.algebra, dict(image.mu), coherent=False)


def free_dsmt_fuse(bba1: Bba, bba2: Bba) -> Bba:
    """Conjunctive fusion on an insulated algebra, where no conflict can
    arise and the result stays coherent."""
    algebra = _check_pair(bba1, bba2)
    if not algebra.is_insulated:
        raise InsulationError(
            "the algebra admits conflicting propositions; use the emr, "
            "tbm or dempster rule instead"
        )
    image = conjunctive(bba1, bba2)
    masses = {p: v for p, v in image.mu.items() if not p.is_bot}
    return Bba(algebra, masses, coherent=True)


def redistribute(image: ConjunctiveImage, rho: Redistribution) -> Bba:
    """m(phi) = mu(phi) + rho(phi) * mu(bot), for phi != bot."""
    if rho.algebra is not image.algebra:
        raise MixedAlgebraError("redistribution over a different algebra")
    rho.check()
    conflict = image.conflict
    masses: dict[Proposition, float] = {
        p: v for p, v in image.mu.items() if not p.is_bot and v != 0.0
    }
    if conflict:
        for p, w in rho.rho.items():
            if w != 0.0:
                masses[p] = masses.get(p, 0.0) + w * conflict
    total = sum(masses.values())
    if abs(total - 1.0) > _SUM_TOL:
        raise RuleError(f"redistributed masses sum to {total!r}")
    return Bba(image.algebra, masses, coherent=True)


def dempster_fuse(bba1: Bba, bba2: Bba) -> Bba:
    """Conjunctive fusion with the conflict normalized away:
    m(phi) = mu(phi) / (1 - mu(bot))."""
    image = conjunctive(bba1, bba2)
    conflict = image.conflict
    if conflict >= 1.0 - 1e-12:
        raise TotalConflictError("total conflict: mu(bot) = 1")
    masses = {
        p: v / (1.0 - conflict)
        for p, v in image.mu.items()
        if not p.is_bot and v != 0.0
    }
    return Bba(image.algebra, masses, coherent=True)
