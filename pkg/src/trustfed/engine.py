"""Per-domain authority: authentication, role grants, trust-gated
authorization, certificates, and post-interaction feedback.

Authorization runs a fixed five-stage pipeline, labelled b through f:

  b  enforcement point receives the request
  c  decision point forwards it to the information point
  d  trust management supplies the requester's trust degree
  e  decision point gates on the trust threshold, then on the role's
     effective permissions for the resource
  f  enforcement point returns the outcome, plus a certificate on permit

Every evaluation records exactly those stages, in that order, whatever the
outcome. A permit records the interaction so that both parties may file
feedback during the current epoch; feedback is the only path that mutates
the trust ledger besides epoch advancement.

Certificates are capability tokens at desk scale: a keyed digest over the
canonical payload, valid for a window of the authority's logical clock.
Secrets are opaque tokens compared in constant time; no real PKI here.

Each authority is a single serialized command queue; authorization reads
take the current ledger snapshot and are pure.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
import json
import math
from dataclasses import dataclass, field

from .crossdomain import CrossParams
from .errors import (
    BadSecret,
    NoPriorInteraction,
    NotAuthenticated,
    NotPermitted,
    RoleNotGranted,
    UnknownEntity,
    UnknownRole,
)
from .roles import RoleHierarchy, RoleId
from .trust import EntityId, TrustLedger, TrustParams


class Outcome(enum.Enum):
    PERMIT = "permit"
    DENY = "deny"


class DenyReason(enum.Enum):
    BELOW_TRUST_THRESHOLD = "BelowTrustThreshold"
    NO_PERMISSION = "NoPermission"
    AUTHENTICATION_FAILED = "AuthenticationFailed"
    NO_CONVERSION = "NoConversion"
    INTER_DOMAIN_DISTRUST = "InterDomainDistrust"


@dataclass(frozen=True)
class Credential:
    """Identity claim: entity plus an opaque shared secret."""

    entity: EntityId
    secret: str

    def __post_init__(self) -> None:
        if not self.secret:
            raise ValueError("credential secret must be non-empty")


@dataclass(frozen=True)
class AccessRequest:
    requester: EntityId
    role: RoleId
    resource: str
    request_id: str


@dataclass
class PolicyDatabase:
    """Domain security policy: trust parameters plus permit thresholds."""

    trust_params: TrustParams = field(default_factory=TrustParams)
    cross_params: CrossParams = field(default_factory=CrossParams)
    permit_threshold: float = 0.25
    resource_thresholds: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, value in [("permit_threshold", self.permit_threshold)] + [
            (f"resource_thresholds[{r}]", t) for r, t in sorted(self.resource_thresholds.items())
        ]:
            if not (math.isfinite(value) and -1.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [-1, 1], got {value}")

    def effective_threshold(self, resource: str) -> float:
        return self.resource_thresholds.get(resource, self.permit_threshold)


@dataclass
class Decision:
    request_id: str
    outcome: Outcome
    reason: DenyReason | None
    trust_at_decision: float

    def __post_init__(self) -> None:
        if self.outcome is Outcome.PERMIT and self.reason is not None:
            raise ValueError("a permit decision carries no deny reason")

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "outcome": self.outcome.value,
            "reason": self.reason.value if self.reason else None,
            "trust_at_decision": self.trust_at_decision,
        }


@dataclass(frozen=True)
class Certificate:
    """Issued grant binding holder, role, resource, and a trust snapshot to
    a validity window on the issuer's logical clock."""

    holder: EntityId
    granted_role: RoleId
    resource: str
    trust_snapshot: float
    issued_at: int
    expires_at: int
    issuer: str
    signature: str

    def payload(self) -> dict:
        return {
            "holder": str(self.holder),
            "granted_role": str(self.granted_role),
            "resource": self.resource,
            "trust_snapshot": self.trust_snapshot,
            "issued_at": self.issued_at,
            "expires_at": self.expires_at,
            "issuer": self.issuer,
        }

    def digest(self) -> str:
        return payload_digest(self.payload())


def canonical_bytes(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def sign_payload(key: bytes, payload: dict) -> str:
    return hmac.new(key, canonical_bytes(payload), hashlib.sha256).hexdigest()


def payload_digest(payload: dict) -> str:
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()[:12]


def mint_certificate(
    key: bytes,
    holder: EntityId,
    role: RoleId,
    resource: str,
    trust_snapshot: float,
    issued_at: int,
    expires_at: int,
    issuer: str,
) -> Certificate:
    unsigned = Certificate(
        holder=holder,
        granted_role=role,
        resource=resource,
        trust_snapshot=trust_snapshot,
        issued_at=issued_at,
        expires_at=expires_at,
        issuer=issuer,
        signature="",
    )
    return Certificate(
        **{**unsigned.__dict__, "signature": sign_payload(key, unsigned.payload())}
    )


def check_certificate(cert: Certificate, key: bytes, now: int) -> bool:
    """True iff the integrity token matches the payload and the clock sits
    inside the validity window."""
    expected = sign_payload(key, cert.payload())
    if not hmac.compare_digest(expected, cert.signature):
        return False
    return cert.issued_at <= now <= cert.expires_at


@dataclass
class PipelineStage:
    label: str
    point: str
    detail: dict

    def to_dict(self) -> dict:
        return {"label": self.label, "point": self.point, "detail": self.detail}


@dataclass
class PipelineTrace:
    request_id: str
    stages: list[PipelineStage] = field(default_factory=list)

    def add(self, label: str, point: str, **detail) -> None:
        self.stages.append(PipelineStage(label=label, point=point, detail=detail))

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.stages]

    def to_dict(self) -> dict:
        return {"request_id": self.request_id, "stages": [s.to_dict() for s in self.stages]}


@dataclass
class _Permit:
    epoch: int
    role: RoleId
    trust: float


class DomainAuthority:
    """The authentication and authorization center of one security domain."""

    def __init__(
        self,
        domain: str,
        hierarchy: RoleHierarchy,
        policy: PolicyDatabase | None = None,
        signing_key: bytes | None = None,
        certificate_ttl: int = 100,
    ):
        violations = hierarchy.validate()
        if violations:
            raise ValueError(f"hierarchy for {domain} is invalid: {violations[0]}")
        if hierarchy.domain != domain:
            raise ValueError(f"hierarchy belongs to {hierarchy.domain}, not {domain}")
        self.domain = domain
        self.hierarchy = hierarchy
        self.policy = policy or PolicyDatabase()
        self.signing_key = signing_key or hashlib.sha256(f"trustfed:{domain}".encode()).digest()
        self.certificate_ttl = certificate_ttl
        self.ledger = TrustLedger(domain, self.policy.trust_params)
        self.clock = 0
        self._secrets: dict[EntityId, str] = {}
        self._grants: dict[EntityId, set[RoleId]] = {}
        self._authenticated: set[EntityId] = set()
        self._permits: dict[tuple[EntityId, str], _Permit] = {}
        self._permitted_pairs: dict[tuple[EntityId, EntityId], int] = {}
        self.resources: dict[str, EntityId] = {}

    # --- registration and roles ---

    def register_entity(self, entity: EntityId, secret: str) -> None:
        """Register a local entity with its authentication secret."""
        if not secret:
            raise ValueError("secret must be non-empty")
        self.ledger.register(entity)
        self._secrets[entity] = secret

    def register_visitor(self, entity: EntityId) -> None:
        """Register a foreign entity so it can accrue trust while visiting."""
        self.ledger.register(entity)

    def register_resource(self, resource: str, owner: EntityId) -> None:
        if not self.ledger.is_registered(owner):
            raise UnknownEntity(f"resource owner {owner} is not registered in {self.domain}")
        self.resources[resource] = owner

    def assign_role(self, entity: EntityId, requested: RoleId) -> RoleId:
        """Grant a role to an entity. Idempotent; the grant alone confers no
        usable permission until authorization passes."""
        if not self.ledger.is_registered(entity):
            raise UnknownEntity(f"{entity} is not registered in {self.domain}")
        if requested not in self.hierarchy.roles:
            raise UnknownRole(f"{requested} does not exist in {self.domain}")
        self._grants.setdefault(entity, set()).add(requested)
        return requested

    def holds_role(self, entity: EntityId, role: RoleId) -> bool:
        return role in self._grants.get(entity, ())

    # --- authentication ---

    def authenticate(self, cred: Credential) -> str:
        """Check the secret and return an opaque session token."""
        stored = self._secrets.get(cred.entity)
        if stored is None:
            raise UnknownEntity(f"{cred.entity} has no credential in {self.domain}")
        if not hmac.compare_digest(stored.encode(), cred.secret.encode()):
            raise BadSecret(f"secret mismatch for {cred.entity}")
        self.clock += 1
        self._authenticated.add(cred.entity)
        token = payload_digest(
            {"entity": str(cred.entity), "issuer": self.domain, "at": self.clock}
        )
        return token

    def is_authenticated(self, entity: EntityId) -> bool:
        return entity in self._authenticated

    # --- trust lookups ---

    def trust_of(self, entity: EntityId) -> float:
        """Current trust degree of an entity in this domain."""
        return self.ledger.compute_domain_trust(entity)

    # --- authorization pipeline ---

    def authorize_local(
        self, req: AccessRequest, db: PolicyDatabase | None = None
    ) -> tuple[Decision, Certificate | None, PipelineTrace]:
        """Run the staged pipeline for a local, authenticated requester."""
        if not self.is_authenticated(req.requester):
            raise NotAuthenticated(f"{req.requester} is not authenticated in {self.domain}")
        if not self.holds_role(req.requester, req.role):
            raise RoleNotGranted(f"{req.requester} was never granted {req.role}")
        trust = self.trust_of(req.requester)
        return self.evaluate_access(
            req.requester, req.role, req.resource, req.request_id, trust, db=db
        )

    def evaluate_access(
        self,
        requester: EntityId,
        role: RoleId,
        resource: str,
        request_id: str,
        trust: float,
        db: PolicyDatabase | None = None,
        trust_source: str = "local",
    ) -> tuple[Decision, Certificate | None, PipelineTrace]:
        """The stage b-f evaluation, with the trust value supplied by the
        caller (the local ledger, or the federation's mapped trust)."""
        db = db or self.policy
        if role not in self.hierarchy.roles:
            raise UnknownRole(f"{role} does not exist in {self.domain}")
        self.clock += 1
        trace = PipelineTrace(request_id=request_id)
        trace.add(
            "b", "pep", requester=str(requester), role=str(role), resource=resource
        )
        trace.add("c", "pdp->pip", queried=str(requester))
        trace.add("d", "tmp", trust=trust, source=trust_source)

        threshold = db.effective_threshold(resource)
        trust_ok = trust >= threshold
        held = self.hierarchy.effective_permissions(role)
        permission_ok = any(p.resource == resource for p in held)
        trace.add(
            "e",
            "pdp",
            threshold=threshold,
            trust_ok=trust_ok,
            permission_ok=permission_ok,
        )

        if not trust_ok:
            decision = Decision(request_id, Outcome.DENY, DenyReason.BELOW_TRUST_THRESHOLD, trust)
            trace.add("f", "pep", outcome="deny", reason=decision.reason.value)
            return decision, None, trace
        if not permission_ok:
            decision = Decision(request_id, Outcome.DENY, DenyReason.NO_PERMISSION, trust)
            trace.add("f", "pep", outcome="deny", reason=decision.reason.value)
            return decision, None, trace

        decision = Decision(request_id, Outcome.PERMIT, None, trust)
        self._permits[(requester, resource)] = _Permit(
            epoch=self.ledger.view.epoch, role=role, trust=trust
        )
        owner = self.resources.get(resource)
        if owner is not None and owner != requester:
            self.note_permitted_interaction(requester, owner)
        cert = self._mint(requester, role, resource, trust)
        trace.add("f", "pep", outcome="permit", certificate=cert.digest())
        return decision, cert, trace

    # --- feedback ---

    def note_permitted_interaction(self, a: EntityId, b: EntityId) -> None:
        """Mark a permitted interaction between two parties this epoch so
        that either may rate the other."""
        pair = (min(a, b), max(a, b))
        self._permitted_pairs[pair] = self.ledger.view.epoch

    def post_interaction_feedback(self, rater: EntityId, ratee: EntityId, ex: float):
        """Record one direction of post-interaction rating.

        Requires a permit-backed interaction between the parties in the
        current epoch; each side rates independently.
        """
        pair = (min(rater, ratee), max(rater, ratee))
        epoch = self._permitted_pairs.get(pair)
        if epoch != self.ledger.view.epoch:
            raise NoPriorInteraction(
                f"no permitted interaction between {rater} and {ratee} this epoch"
            )
        self.clock += 1
        return self.ledger.record_experience(rater, ratee, ex)

    # --- certificates ---

    def _mint(self, holder: EntityId, role: RoleId, resource: str, trust: float) -> Certificate:
        return mint_certificate(
            self.signing_key,
            holder,
            role,
            resource,
            trust,
            issued_at=self.clock,
            expires_at=self.clock + self.certificate_ttl,
            issuer=self.domain,
        )

    def issue_certificate(
        self, holder: EntityId, role: RoleId, resource: str, db: PolicyDatabase | None = None
    ) -> Certificate:
        """Issue a certificate backed by a permit decision from this epoch."""
        permit = self._permits.get((holder, resource))
        if permit is None or permit.epoch != self.ledger.view.epoch or permit.role != role:
            raise NotPermitted(f"no permit for {holder} on {resource} as {role}")
        self.clock += 1
        return self._mint(holder, role, resource, permit.trust)

    def verify_certificate(self, cert: Certificate) -> bool:
        """True iff this authority signed the certificate, the payload is
        untampered, and the logical clock is within the validity window."""
        return check_certificate(cert, self.signing_key, self.clock)

    # --- time ---

    def advance_clock(self, ticks: int = 1) -> int:
        self.clock += ticks
        return self.clock

    def advance_epoch(self):
        """Roll the ledger to the next epoch snapshot."""
        self.clock += 1
        return self.ledger.advance_epoch()
