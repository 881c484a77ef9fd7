"""Witness scales at which every annulus about the base point is chain-connected."""
from __future__ import annotations

from dataclasses import dataclass

from .core import ScaleLadder
from .filtration import STABILIZED, build_end_system, stable_end_count
from .sigma import omega_map, sigma_report


@dataclass(frozen=True)
class NonscatteringWitness:
    R: float
    R_index: int
    levels: tuple  # (r, component count) for every cut-off

    def to_dict(self):
        return {"R": self.R, "levels": [{"r": r, "count": c} for r, c in self.levels]}


def nonscattering_witness(instance, ladder, system=None):
    """Least ladder scale whose annuli all have at most one component, or None."""
    if system is None:
        system = build_end_system(instance, ladder)
    counts = system.counts()
    for j, R in enumerate(system.ladder.R_values):
        col = counts[:, j]
        if (col <= 1).all():
            levels = tuple((r, int(c)) for r, c in zip(system.ladder.r_values, col))
            return NonscatteringWitness(R, j, levels)
    return None


def witness_ladder(ladder, witness, window=3):
    """The scales at or above the witness, padded by doubling to ``window`` scales."""
    big = [R for R in ladder.R_values if R >= witness.R]
    while len(big) < window:
        big.append(big[-1] * 2.0)
    return ScaleLadder(ladder.r_values, tuple(big))


@dataclass(frozen=True)
class ConsequenceCheck:
    witness: NonscatteringWitness | None
    status: str  # stability label on the given ladder
    status_above: str | None  # stability label on the scales above the witness
    classes: int | None
    bijective: bool | None
    violations: tuple

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {"witness": None if self.witness is None else self.witness.to_dict(),
                "status": self.status, "status_above_witness": self.status_above,
                "classes": self.classes, "omega_bijective": self.bijective,
                "violations": list(self.violations)}


def check_consequences(instance, ladder, margin=0.1, window=3):
    """Test the one-end consequences of a witness on one instance.

    With a witness: the stability status on the full ladder is never
    Stabilized(k) with k >= 2; on the scales above the witness it is
    Stabilized(k) with k <= 1; the escape classes number at most one; and a
    single class maps bijectively onto the single thread.
    """
    system = build_end_system(instance, ladder)
    report = stable_end_count(system, window)
    wit = nonscattering_witness(instance, ladder, system)
    if wit is None:
        return ConsequenceCheck(None, str(report), None, None, None, ())
    bad = []
    if report.status == STABILIZED and report.k >= 2:
        bad.append(f"full ladder reports {report}")
    above = witness_ladder(ladder, wit, window)
    sys_above = build_end_system(instance, above)
    rep_above = stable_end_count(sys_above, window)
    if rep_above.status != STABILIZED or rep_above.k > 1:
        bad.append(f"scales above the witness report {rep_above}")
    sig = sigma_report(instance, above, margin, system=sys_above)
    n_classes = sig.class_count()
    if n_classes > 1:
        bad.append(f"{n_classes} escape classes")
    bij = None
    if n_classes:
        bij = omega_map(sig, sys_above).bijective()
        if not bij:
            bad.append("omega is not a bijection")
    return ConsequenceCheck(wit, str(report), str(rep_above), n_classes, bij, tuple(bad))
