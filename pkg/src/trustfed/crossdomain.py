"""Inter-domain trust: how much domain X trusts domain Y, built from the
first-hand records Y's entities accrued while visiting X.

* cross dtd — mean direct trust (in X's ledger) over Y's visitors that
  have interacted in X.
* cross rp — weighted sum of each visitor's satisfaction-in-X times its
  reputation-in-X, with per-entity weights normalised over the
  contributing set.
* cross td — convex blend of the two: ``delta * dtd + (1 - delta) * rp``.

All functions are pure over a ledger snapshot; the pair-trust matrix has a
single serialized writer (the federation coordinator). TD(X, Y) and
TD(Y, X) are independent values; no symmetry is assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AllWeightsZero, MixedDomains
from .trust import EntityId, TrustLedger


@dataclass(frozen=True)
class CrossParams:
    """Inter-domain weighting: the dtd/rp blend plus optional per-entity
    weighting factors (uniform when an entity has no explicit weight)."""

    delta: float = 0.5
    theta: dict[EntityId, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and 0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie strictly inside (0, 1), got {self.delta}")
        for entity, weight in self.theta.items():
            if not (math.isfinite(weight) and weight >= 0.0):
                raise ValueError(f"theta weight for {entity} must be >= 0, got {weight}")

    def weight_for(self, entity: EntityId) -> float:
        return self.theta.get(entity, 1.0)


@dataclass
class DomainPairTrust:
    """Directed trust of one observing domain toward an observed one."""

    observer: str
    observed: str
    cross_dtd: float = 0.0
    cross_rp: float = 0.0
    cross_td: float = 0.0

    def __post_init__(self) -> None:
        if self.observer == self.observed:
            raise ValueError("observer and observed domains must differ")
        for name in ("cross_dtd", "cross_rp", "cross_td"):
            value = getattr(self, name)
            if not (math.isfinite(value) and -1.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [-1, 1], got {value}")


def _check_foreign(ledger: TrustLedger, foreign_entities: set[EntityId]) -> None:
    homes = {e.domain for e in foreign_entities}
    if ledger.domain in homes:
        raise MixedDomains(f"entities of the observer domain {ledger.domain} in foreign set")
    if len(homes) > 1:
        raise MixedDomains(f"foreign set spans several domains: {sorted(homes)}")


def compute_cross_dtd(ledger: TrustLedger, foreign_entities: set[EntityId]) -> float:
    """Mean direct trust accrued in the observer's ledger by the foreign
    entities that have actually interacted there; 0.0 when none have."""
    _check_foreign(ledger, foreign_entities)
    values = []
    for entity in sorted(foreign_entities):
        mean = ledger.mean_dtd_toward(entity)
        if mean is not None:
            values.append(mean)
    if not values:
        return 0.0
    return sum(values) / len(values)


def compute_cross_rp(
    ledger: TrustLedger, foreign_entities: set[EntityId], params: CrossParams
) -> float:
    """Weighted reputation the foreign domain earned in the observer's domain.

    Each contributing visitor adds ``weight * qos_in_observer * rp_in_observer``
    with the weights normalised to sum to 1 over the contributors; 0.0 when
    no visitor has interacted yet.
    """
    _check_foreign(ledger, foreign_entities)
    contributors = []
    for entity in sorted(foreign_entities):
        mean_qos = ledger.mean_qos_toward(entity)
        if mean_qos is not None:
            contributors.append((entity, mean_qos))
    if not contributors:
        return 0.0
    total_weight = sum(params.weight_for(e) for e, _ in contributors)
    if total_weight <= 0.0:
        raise AllWeightsZero("theta weights over the contributing entities sum to zero")
    return sum(
        (params.weight_for(e) / total_weight) * qos * ledger.reputation_of(e)
        for e, qos in contributors
    )


def combined_trust(delta: float, cross_dtd: float, cross_rp: float) -> float:
    """Blend of inter-domain direct trust and inter-domain reputation."""
    return delta * cross_dtd + (1.0 - delta) * cross_rp


def compute_cross_td(pair: DomainPairTrust, params: CrossParams) -> float:
    """The pair's combined trust degree from its stored dtd and rp."""
    return combined_trust(params.delta, pair.cross_dtd, pair.cross_rp)


def neutral_pair(
    observer: str, observed: str, initial_rp: float, params: CrossParams
) -> DomainPairTrust:
    """Starting pair trust before any cross-domain evidence exists."""
    dtd = 0.0
    rp = initial_rp
    return DomainPairTrust(
        observer=observer,
        observed=observed,
        cross_dtd=dtd,
        cross_rp=rp,
        cross_td=combined_trust(params.delta, dtd, rp),
    )
