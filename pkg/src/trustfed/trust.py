"""Single-domain behavioral trust: experience ratings, satisfaction scores,
direct trust, reputation, and the per-entity domain trust degree.

The quantities and how they update:

* ``ex`` — one interaction's experience rating, strictly inside (-1, 1).
  Positive means satisfied, negative means not.
* ``qos`` — exponentially blended satisfaction between a rater and a ratee:
  ``qos' = alpha * qos + (1 - alpha) * ex``.
* ``dtd`` — direct trust degree from first-hand interaction:
  ``dtd' = beta * qos + (1 - beta) * ex`` (the history term is the
  pre-update qos).
* ``Rp`` — reputation of an entity: the mean over its raters of
  ``qos(rater -> entity) * Rp(rater)``, where each rater's reputation is
  read from the previous epoch's frozen snapshot.
* ``TD`` — domain trust degree: ``gamma * mean_dtd + (1 - gamma) * Rp``.

Reputation is self-referential, so each epoch's values are computed in one
pass from the prior epoch's snapshot (initialised to ``initial_rp``) rather
than by in-place fixed-point iteration; that keeps replays deterministic.

The ledger is a single-writer state machine: all mutation goes through
``record_experience`` and ``advance_epoch``; views are immutable snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import RatingOutOfRange, SelfRating, UnknownEntity


@dataclass(frozen=True, order=True)
class EntityId:
    """Globally unique entity identity: a home domain plus a local name."""

    domain: str
    local_name: str

    def __post_init__(self) -> None:
        if not self.domain:
            raise ValueError("entity domain must be non-empty")
        if not self.local_name:
            raise ValueError("entity local_name must be non-empty")

    def __str__(self) -> str:
        return f"{self.domain}:{self.local_name}"


def validate_rating(ex: float) -> float:
    """Reject ratings at or outside the open interval (-1, 1)."""
    if not math.isfinite(ex) or not -1.0 < ex < 1.0:
        raise RatingOutOfRange(f"experience rating must lie strictly inside (-1, 1), got {ex}")
    return float(ex)


@dataclass(frozen=True)
class TrustParams:
    """Blending weights and neutral starting values for a domain's ledger.

    All three weights are convex-combination coefficients and must lie
    strictly inside (0, 1); that is what makes every update a convex blend
    and keeps qos/dtd provably inside (-1, 1).
    """

    alpha: float = 0.5
    beta: float = 0.5
    gamma: float = 0.5
    initial_qos: float = 0.0
    initial_dtd: float = 0.0
    initial_rp: float = 0.5

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 < value < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {value}")
        for name in ("initial_qos", "initial_dtd", "initial_rp"):
            value = getattr(self, name)
            if not (math.isfinite(value) and -1.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [-1, 1], got {value}")


def qos_update(alpha: float, previous: float, ex: float) -> float:
    """New satisfaction score: history weighted by alpha, rating by 1 - alpha."""
    return alpha * previous + (1.0 - alpha) * ex


def dtd_update(beta: float, previous_qos: float, ex: float) -> float:
    """New direct trust degree; the history term is the pre-update qos."""
    return beta * previous_qos + (1.0 - beta) * ex


def trust_degree(gamma: float, direct_mean: float, reputation: float) -> float:
    """Blend of first-hand trust and reputation."""
    return gamma * direct_mean + (1.0 - gamma) * reputation


@dataclass
class PairwiseTrust:
    """First-hand trust state of one rater toward one ratee."""

    rater: EntityId
    ratee: EntityId
    k: int = 0
    qos: float = 0.0
    dtd: float = 0.0
    last_ex: float = 0.0


@dataclass
class DomainTrustView:
    """Frozen per-epoch snapshot of reputations and trust degrees."""

    domain: str
    reputations: dict[EntityId, float] = field(default_factory=dict)
    domain_trust: dict[EntityId, float] = field(default_factory=dict)
    epoch: int = 0


class TrustLedger:
    """Per-domain store of pairwise interaction histories and trust snapshots.

    Entities (locals and visiting foreigners alike) must be registered
    before they can rate or be rated. Reads are pure; the only mutations
    are ``register``, ``record_experience`` and ``advance_epoch``.
    """

    def __init__(self, domain: str, params: TrustParams | None = None):
        self.domain = domain
        self.params = params or TrustParams()
        self.entities: set[EntityId] = set()
        self.pairwise: dict[tuple[EntityId, EntityId], PairwiseTrust] = {}
        self._view = DomainTrustView(domain=domain)

    # --- registration ---

    def register(self, entity: EntityId) -> None:
        """Add an entity to this domain's ledger (idempotent)."""
        self.entities.add(entity)

    def is_registered(self, entity: EntityId) -> bool:
        return entity in self.entities

    def _require(self, entity: EntityId) -> None:
        if entity not in self.entities:
            raise UnknownEntity(f"{entity} is not registered in domain {self.domain}")

    # --- recording ---

    def record_experience(self, rater: EntityId, ratee: EntityId, ex: float) -> PairwiseTrust:
        """Record one interaction's rating and roll qos/dtd forward.

        Returns the updated pairwise record. The dtd update uses the qos
        value from before this rating as its history term.
        """
        self._require(rater)
        self._require(ratee)
        if rater == ratee:
            raise SelfRating(f"{rater} cannot rate itself")
        ex = validate_rating(ex)

        record = self.pairwise.get((rater, ratee))
        if record is None:
            record = PairwiseTrust(
                rater=rater,
                ratee=ratee,
                qos=self.params.initial_qos,
                dtd=self.params.initial_dtd,
            )
            self.pairwise[(rater, ratee)] = record

        previous_qos = record.qos
        record.qos = qos_update(self.params.alpha, previous_qos, ex)
        record.dtd = dtd_update(self.params.beta, previous_qos, ex)
        record.last_ex = ex
        record.k += 1
        return record

    # --- aggregation helpers ---

    def raters_of(self, ratee: EntityId) -> list[EntityId]:
        """Distinct raters with at least one recorded interaction toward ratee."""
        return sorted(
            rater
            for (rater, target), rec in self.pairwise.items()
            if target == ratee and rater != ratee and rec.k > 0
        )

    def mean_qos_toward(self, ratee: EntityId) -> float | None:
        """Mean latest qos over raters of ratee, or None with no raters."""
        values = [self.pairwise[(r, ratee)].qos for r in self.raters_of(ratee)]
        if not values:
            return None
        return sum(values) / len(values)

    def mean_dtd_toward(self, ratee: EntityId) -> float | None:
        """Mean latest dtd over raters of ratee, or None with no raters."""
        values = [self.pairwise[(r, ratee)].dtd for r in self.raters_of(ratee)]
        if not values:
            return None
        return sum(values) / len(values)

    # --- derived quantities ---

    @property
    def view(self) -> DomainTrustView:
        """The current epoch snapshot."""
        return self._view

    def reputation_of(self, entity: EntityId, view: DomainTrustView | None = None) -> float:
        """Snapshot reputation, defaulting to initial_rp for unseen entities."""
        view = view if view is not None else self._view
        return view.reputations.get(entity, self.params.initial_rp)

    def compute_reputation(self, ratee: EntityId, view: DomainTrustView | None = None) -> float:
        """Rater-reputation-weighted mean of the latest qos values toward ratee.

        Each contribution is ``qos(rater -> ratee) * Rp(rater)`` with the
        rater's reputation read from the given (previous-epoch) snapshot;
        with no raters the configured initial reputation is returned.
        """
        self._require(ratee)
        view = view if view is not None else self._view
        raters = self.raters_of(ratee)
        if not raters:
            return self.params.initial_rp
        total = sum(
            self.pairwise[(rater, ratee)].qos * self.reputation_of(rater, view)
            for rater in raters
        )
        return total / len(raters)

    def compute_domain_trust(
        self,
        entity: EntityId,
        view: DomainTrustView | None = None,
        params: TrustParams | None = None,
    ) -> float:
        """Trust degree of an entity: blend of mean first-hand dtd and reputation.

        With no raters the direct term falls back to the configured initial
        dtd; the reputation comes from the snapshot.
        """
        self._require(entity)
        view = view if view is not None else self._view
        params = params or self.params
        direct = self.mean_dtd_toward(entity)
        if direct is None:
            direct = params.initial_dtd
        return trust_degree(params.gamma, direct, self.reputation_of(entity, view))

    def advance_epoch(self) -> DomainTrustView:
        """Recompute all reputations and trust degrees in one pass.

        Reputations are computed Jacobi-style from the prior epoch's frozen
        snapshot; trust degrees then use the freshly computed reputations.
        Deterministic given the ledger state.
        """
        old = self._view
        ordered = sorted(self.entities)
        reputations = {e: self.compute_reputation(e, old) for e in ordered}
        interim = DomainTrustView(
            domain=self.domain, reputations=reputations, epoch=old.epoch + 1
        )
        domain_trust = {e: self.compute_domain_trust(e, interim) for e in ordered}
        self._view = DomainTrustView(
            domain=self.domain,
            reputations=reputations,
            domain_trust=domain_trust,
            epoch=old.epoch + 1,
        )
        return self._view
