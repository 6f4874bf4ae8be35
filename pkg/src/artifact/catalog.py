"""Built-in extensions with known answers, used for cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spec: dict
    t: int
    v_p_m: int
    free: bool
    provenance: str  # "published", "derived" or "trivial"
    citation: str
    v_p_assoc_index: Optional[int] = None
    v_p_maximal_order_index: Optional[int] = None
    assoc_pivots: Optional[Tuple[int, ...]] = None
    nu: Optional[Tuple[int, ...]] = None
    extra: dict = field(default_factory=dict)


def _eis(poly):
    return {"kind": "eisenstein", "poly": poly}


# Each ramified quadratic of Q_2 is given by an Eisenstein polynomial for a
# shifted generator, so the power basis of the root is integral.
CATALOG: Tuple[CatalogEntry, ...] = (
    CatalogEntry(
        name="Q2(sqrt-1)/Q2",
        spec={"p": 2, "layers": [_eis([2, -2, 1])]},
        t=1,
        v_p_m=1,
        free=True,
        provenance="published",
        citation="weakly ramified quadratic: minimal index equals the residue field size",
        v_p_assoc_index=1,
    ),
    CatalogEntry(
        name="Q2(sqrt2)/Q2",
        spec={"p": 2, "layers": [_eis([-2, 0, 1])]},
        t=2,
        v_p_m=1,
        free=True,
        provenance="published",
        citation="maximally ramified: m = p^([L:Q_p]/2)",
        v_p_assoc_index=1,
    ),
    CatalogEntry(
        name="Q2(sqrt-2)/Q2",
        spec={"p": 2, "layers": [_eis([2, 0, 1])]},
        t=2,
        v_p_m=1,
        free=True,
        provenance="published",
        citation="maximally ramified: m = p^([L:Q_p]/2)",
        v_p_assoc_index=1,
    ),
    CatalogEntry(
        name="Q2(sqrt3)/Q2",
        spec={"p": 2, "layers": [_eis([-2, -2, 1])]},
        t=1,
        v_p_m=1,
        free=True,
        provenance="published",
        citation="weakly ramified quadratic: minimal index equals the residue field size",
        v_p_assoc_index=1,
    ),
    CatalogEntry(
        name="Q2(zeta8)/Q2(zeta8+zeta8^-1)",
        spec={
            "p": 2,
            "layers": [_eis([-2, 0, 1]), _eis([[2, -1], [2, -1], 1])],
            "base_cut": 1,
        },
        t=1,
        v_p_m=1,
        free=True,
        provenance="published",
        citation="relative quadratic over Q_2(sqrt2): associated order index 2, maximal order index 4",
        v_p_assoc_index=1,
        v_p_maximal_order_index=2,
        nu=(0, 1),
    ),
    CatalogEntry(
        name="cyclic cubic/Q3",
        spec={"p": 3, "layers": [_eis([3, 0, -3, 1])]},
        t=1,
        v_p_m=1,
        free=True,
        provenance="published",
        citation="absolutely abelian formula with f_L = n = d = 1",
        v_p_assoc_index=1,
        assoc_pivots=(0, 0, 1),
        nu=(0, 0, 1),
    ),
    CatalogEntry(
        name="Q3(zeta3)(cbrt(zeta3-1))/Q3(zeta3)",
        spec={"p": 3, "layers": [_eis([3, 3, 1]), _eis([[0, -1], 0, 0, 1])]},
        t=3,
        v_p_m=3,
        free=True,
        provenance="published",
        citation="Kummer extension by a uniformiser root: free over a maximal associated order",
        v_p_assoc_index=3,
        v_p_maximal_order_index=3,
        assoc_pivots=(0, 1, 2),
    ),
    CatalogEntry(
        name="Q4/Q2",
        spec={"p": 2, "layers": [{"kind": "unramified", "poly": [1, 1, 1]}]},
        t=-1,
        v_p_m=0,
        free=True,
        provenance="trivial",
        citation="unramified, hence tame: m = 1",
        v_p_assoc_index=0,
        assoc_pivots=(0, 0),
    ),
)


def entry(name: str) -> CatalogEntry:
    for e in CATALOG:
        if e.name == name:
            return e
    raise KeyError(name)
