"""The capacity-security region: which (R, z) pairs admit a feasible code."""

from __future__ import annotations

from dataclasses import dataclass

from .network import CutCapacities

# B1: z <= min(C_K-S, C_K-T)   B2: R <= C_S-T   B3: R + z <= C_KS-T
BOUNDS = ("B1", "B2", "B3")


@dataclass(frozen=True)
class RatePoint:
    R: int
    z: int

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("theorem requires R > 0")
        if self.z < 0:
            raise ValueError("z must be non-negative")


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    violated_bounds: frozenset[str]

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "violated_bounds": sorted(self.violated_bounds)}


def feasible(caps: CutCapacities, p: RatePoint | tuple[int, int]) -> FeasibilityVerdict:
    if not isinstance(p, RatePoint):
        p = RatePoint(*p)
    violated = set()
    if p.z > min(caps.c_ks, caps.c_kt):
        violated.add("B1")
    if p.R > caps.c_st:
        violated.add("B2")
    if p.R + p.z > caps.c_kst:
        violated.add("B3")
    return FeasibilityVerdict(not violated, frozenset(violated))


def max_rate(caps: CutCapacities, z: int) -> int:
    """Largest feasible R at wiretap budget ``z``; 0 if none."""
    if z < 0:
        raise ValueError("z must be non-negative")
    if z > min(caps.c_ks, caps.c_kt):
        return 0
    return max(0, min(caps.c_st, caps.c_kst - z))


def region_boundary(caps: CutCapacities) -> list[tuple[int, int]]:
    out = []
    for z in range(min(caps.c_ks, caps.c_kt) + 1):
        r = max_rate(caps, z)
        if r < 1:
            break
        out.append((z, r))
    return out
