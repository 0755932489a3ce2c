"""Federation coordinator: inter-domain trust, certificate handoff, and the
twelve-step cross-domain access protocol.

The steps, labelled i through xii:

   i    requester's role possession is checked at home
   ii   home authority evaluates the requester's trust (recorded; the
        value feeds the trust mapping, enforcement happens at viii)
   iii  coordinator gates on the domain-pair trust degree and issues an
        inter-domain certificate on pass
   iv   request forwarded to the target domain with certificate and role
   v    outer role converted through the correlation set; no conversion
        means the request is denied here
   vi   certificate relayed to the target authority
   vii  trust mapping: effective trust = pair trust times the requester's
        home trust (negative home trust imports as zero), clamped
   viii target authority runs its local pipeline over the effective trust
        and the converted role
   ix   result returned; on permit the resource is granted
   x    visitor's rating of the provider, recorded in the visitor's home
        ledger (the provider accrues trust there as a foreign entity)
   xi   provider's rating of the visitor, recorded in the host ledger
   xii  coordinator recomputes the domain-pair trust from the ledgers

A deny terminates the trace at its gating step (iii, v, or viii). Steps x
and xi are both mandatory: feedback is buffered until both sides have
rated, then applied atomically in x, xi, xii order.

The coordinator is a single serialized writer for the pair-trust matrix;
domain authorities stay independent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .conversion import CorrelationSet, classify_policy, convert_role
from .crossdomain import (
    DomainPairTrust,
    combined_trust,
    compute_cross_dtd,
    compute_cross_rp,
    neutral_pair,
)
from .engine import (
    Certificate,
    Decision,
    DenyReason,
    DomainAuthority,
    Outcome,
    PipelineTrace,
    PolicyDatabase,
    check_certificate,
    mint_certificate,
    payload_digest,
)
from .errors import (
    DuplicateDomain,
    RoleNotHeld,
    UnknownDomain,
    UnknownEntity,
    UnknownRequest,
)
from .roles import RoleHierarchy, RoleId
from .trust import EntityId

PROTOCOL_STEPS = [
    ("i", "role-possession"),
    ("ii", "home-trust"),
    ("iii", "interdomain-gate"),
    ("iv", "request-forwarded"),
    ("v", "role-conversion"),
    ("vi", "certificate-relayed"),
    ("vii", "trust-mapping"),
    ("viii", "local-evaluation"),
    ("ix", "result-returned"),
    ("x", "visitor-feedback"),
    ("xi", "provider-feedback"),
    ("xii", "pair-trust-update"),
]

STEP_LABELS = [label for label, _ in PROTOCOL_STEPS]
_STEP_NAMES = dict(PROTOCOL_STEPS)


@dataclass(frozen=True)
class CrossDomainRequest:
    requester: EntityId
    home_domain: str
    target_domain: str
    outer_role: RoleId
    resource: str
    request_id: str

    def __post_init__(self) -> None:
        if self.home_domain == self.target_domain:
            raise ValueError("cross-domain request must cross domains")
        if self.requester.domain != self.home_domain:
            raise ValueError(
                f"requester {self.requester} does not live in {self.home_domain}"
            )


@dataclass
class ProtocolStep:
    label: str
    name: str
    outcome: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "name": self.name,
            "outcome": self.outcome,
            "digest": payload_digest(self.payload),
            "payload": self.payload,
        }


@dataclass
class ProtocolTrace:
    request_id: str
    steps: list[ProtocolStep] = field(default_factory=list)

    def add(self, label: str, outcome: str, **payload) -> None:
        self.steps.append(
            ProtocolStep(label=label, name=_STEP_NAMES[label], outcome=outcome, payload=payload)
        )

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.steps]

    def to_dict(self) -> dict:
        return {"request_id": self.request_id, "steps": [s.to_dict() for s in self.steps]}


@dataclass
class FederationState:
    """Registered domains, the directed pair-trust matrix, and the
    correlation sets keyed (outer, local)."""

    domains: set[str] = field(default_factory=set)
    pair_trust: dict[tuple[str, str], DomainPairTrust] = field(default_factory=dict)
    correlation_sets: dict[tuple[str, str], CorrelationSet] = field(default_factory=dict)
    interdomain_threshold: float = 0.0

    def __post_init__(self) -> None:
        if not -1.0 <= self.interdomain_threshold <= 1.0:
            raise ValueError("interdomain_threshold must lie in [-1, 1]")


@dataclass
class _PendingTransaction:
    request: CrossDomainRequest
    provider: EntityId
    converted: RoleId
    trace: ProtocolTrace
    visitor_ex: float | None = None
    provider_ex: float | None = None


class Federation:
    """The advanced authority coordinating authorization across domains."""

    def __init__(
        self,
        interdomain_threshold: float = 0.0,
        mutual_update: bool = True,
        signing_key: bytes | None = None,
        certificate_ttl: int = 100,
    ):
        self.state = FederationState(interdomain_threshold=interdomain_threshold)
        self.mutual_update = mutual_update
        self.signing_key = signing_key or hashlib.sha256(b"trustfed:federation").digest()
        self.certificate_ttl = certificate_ttl
        self.authorities: dict[str, DomainAuthority] = {}
        self.clock = 0
        self._pending: dict[str, _PendingTransaction] = {}
        self._completed: set[str] = set()

    # --- topology ---

    def register_domain(
        self,
        domain: str,
        hierarchy: RoleHierarchy,
        policy: PolicyDatabase | None = None,
        authority: DomainAuthority | None = None,
    ) -> FederationState:
        """Join a domain; pair trust against every existing domain starts at
        the neutral value derived from each observer's own parameters."""
        if domain in self.state.domains:
            raise DuplicateDomain(f"{domain} is already registered")
        authority = authority or DomainAuthority(domain, hierarchy, policy)
        self.authorities[domain] = authority
        for other in sorted(self.state.domains):
            peer = self.authorities[other]
            self.state.pair_trust[(domain, other)] = neutral_pair(
                domain,
                other,
                authority.policy.trust_params.initial_rp,
                authority.policy.cross_params,
            )
            self.state.pair_trust[(other, domain)] = neutral_pair(
                other,
                domain,
                peer.policy.trust_params.initial_rp,
                peer.policy.cross_params,
            )
        self.state.domains.add(domain)
        return self.state

    def authority(self, domain: str) -> DomainAuthority:
        try:
            return self.authorities[domain]
        except KeyError:
            raise UnknownDomain(f"{domain} is not registered") from None

    def install_correlations(self, cs: CorrelationSet) -> None:
        """Register a correlation set after classifying it against the two
        hierarchies (which also checks role membership)."""
        outer = self.authority(cs.outer_domain).hierarchy
        local = self.authority(cs.local_domain).hierarchy
        classify_policy(cs, outer, local)
        self.state.correlation_sets[(cs.outer_domain, cs.local_domain)] = cs

    def pair(self, observer: str, observed: str) -> DomainPairTrust:
        self.authority(observer)
        self.authority(observed)
        return self.state.pair_trust[(observer, observed)]

    # --- trust mapping ---

    def map_trust(self, requester: EntityId, target_domain: str) -> float:
        """Effective trust of a foreign requester in the target domain:
        pair trust times the requester's home trust, with negative home
        trust importing as zero, clamped to [-1, 1]."""
        home = self.authority(requester.domain)
        if not home.ledger.is_registered(requester):
            raise UnknownEntity(f"{requester} is not registered at home")
        pair = self.pair(target_domain, requester.domain)
        home_trust = home.trust_of(requester)
        raw = pair.cross_td * max(home_trust, 0.0)
        return max(-1.0, min(1.0, raw))

    # --- the cross-domain protocol ---

    def request_cross_domain_access(
        self, req: CrossDomainRequest
    ) -> tuple[Decision, ProtocolTrace]:
        """Run steps i through ix. On permit the transaction stays pending
        until both feedback sides arrive (steps x-xii); on deny the trace
        ends at the gating step."""
        home = self.authority(req.home_domain)
        target = self.authority(req.target_domain)
        if not home.ledger.is_registered(req.requester):
            raise UnknownEntity(f"{req.requester} is not registered in {req.home_domain}")
        if not home.holds_role(req.requester, req.outer_role):
            raise RoleNotHeld(f"{req.requester} does not hold {req.outer_role}")
        self.clock += 1
        trace = ProtocolTrace(request_id=req.request_id)

        trace.add("i", "ok", requester=str(req.requester), role=str(req.outer_role))

        home_trust = home.trust_of(req.requester)
        home_threshold = home.policy.permit_threshold
        trace.add(
            "ii",
            "recorded",
            trust=home_trust,
            threshold=home_threshold,
            meets_home_threshold=home_trust >= home_threshold,
        )

        pair = self.pair(req.target_domain, req.home_domain)
        if pair.cross_td < self.state.interdomain_threshold:
            trace.add(
                "iii",
                "deny",
                pair_trust=pair.cross_td,
                threshold=self.state.interdomain_threshold,
            )
            decision = Decision(
                req.request_id, Outcome.DENY, DenyReason.INTER_DOMAIN_DISTRUST, pair.cross_td
            )
            return decision, trace
        cert = mint_certificate(
            self.signing_key,
            req.requester,
            req.outer_role,
            req.resource,
            pair.cross_td,
            issued_at=self.clock,
            expires_at=self.clock + self.certificate_ttl,
            issuer="federation",
        )
        trace.add(
            "iii",
            "ok",
            pair_trust=pair.cross_td,
            threshold=self.state.interdomain_threshold,
            certificate=cert.digest(),
        )

        trace.add("iv", "ok", certificate=cert.digest(), role=str(req.outer_role))

        cs = self.state.correlation_sets.get((req.home_domain, req.target_domain))
        if cs is None:
            cs = CorrelationSet(outer_domain=req.home_domain, local_domain=req.target_domain)
        result = convert_role(req.outer_role, cs, home.hierarchy, target.hierarchy)
        if result.local_role is None:
            trace.add(
                "v",
                "deny",
                outer_role=str(req.outer_role),
                candidates=sorted(str(c) for c in result.candidates),
            )
            decision = Decision(
                req.request_id, Outcome.DENY, DenyReason.NO_CONVERSION, pair.cross_td
            )
            return decision, trace
        trace.add(
            "v",
            "ok",
            outer_role=str(req.outer_role),
            local_role=str(result.local_role),
            candidates=sorted(str(c) for c in result.candidates),
        )

        trace.add("vi", "ok", certificate=cert.digest())

        effective = self.map_trust(req.requester, req.target_domain)
        trace.add(
            "vii",
            "ok",
            pair_trust=pair.cross_td,
            home_trust=home_trust,
            effective_trust=effective,
        )

        target.register_visitor(req.requester)
        decision, local_cert, pipeline = target.evaluate_access(
            req.requester,
            result.local_role,
            req.resource,
            req.request_id,
            effective,
            trust_source="federation",
        )
        if decision.outcome is Outcome.DENY:
            trace.add(
                "viii",
                "deny",
                reason=decision.reason.value,
                effective_trust=effective,
                pipeline=pipeline.to_dict(),
            )
            return decision, trace
        trace.add(
            "viii",
            "permit",
            effective_trust=effective,
            certificate=local_cert.digest() if local_cert else None,
            pipeline=pipeline.to_dict(),
        )

        trace.add("ix", "ok", granted=True, resource=req.resource)

        provider = target.resources.get(req.resource)
        if provider is not None:
            home.register_visitor(provider)
            home.note_permitted_interaction(req.requester, provider)
            self._pending[req.request_id] = _PendingTransaction(
                request=req, provider=provider, converted=result.local_role, trace=trace
            )
        return decision, trace

    def submit_feedback(self, request_id: str, rater: EntityId, ex: float) -> ProtocolTrace:
        """File one side's rating for a permitted cross-domain transaction.

        Both sides are mandatory; the trace gains steps x, xi, and xii only
        once both ratings are in, and they are applied atomically.
        """
        txn = self._pending.get(request_id)
        if txn is None:
            raise UnknownRequest(f"no pending cross-domain transaction {request_id}")
        if rater == txn.request.requester:
            txn.visitor_ex = float(ex)
        elif rater == txn.provider:
            txn.provider_ex = float(ex)
        else:
            raise UnknownEntity(f"{rater} is not a party to {request_id}")
        if txn.visitor_ex is None or txn.provider_ex is None:
            return txn.trace
        return self._complete(txn)

    def _complete(self, txn: _PendingTransaction) -> ProtocolTrace:
        req = txn.request
        home = self.authority(req.home_domain)
        target = self.authority(req.target_domain)

        visitor_record = home.post_interaction_feedback(
            req.requester, txn.provider, txn.visitor_ex
        )
        txn.trace.add(
            "x",
            "ok",
            rater=str(req.requester),
            ratee=str(txn.provider),
            ex=txn.visitor_ex,
            qos=visitor_record.qos,
            dtd=visitor_record.dtd,
        )

        provider_record = target.post_interaction_feedback(
            txn.provider, req.requester, txn.provider_ex
        )
        txn.trace.add(
            "xi",
            "ok",
            rater=str(txn.provider),
            ratee=str(req.requester),
            ex=txn.provider_ex,
            qos=provider_record.qos,
            dtd=provider_record.dtd,
        )

        self._completed.add(req.request_id)
        forward = self.update_pair_trust(
            req.target_domain, req.home_domain, feedback=req.request_id
        )
        payload = {
            "observer": req.target_domain,
            "observed": req.home_domain,
            "cross_dtd": forward.cross_dtd,
            "cross_rp": forward.cross_rp,
            "cross_td": forward.cross_td,
        }
        if self.mutual_update:
            reverse = self.update_pair_trust(
                req.home_domain, req.target_domain, feedback=req.request_id
            )
            payload["reverse_cross_td"] = reverse.cross_td
        txn.trace.add("xii", "ok", **payload)
        del self._pending[req.request_id]
        return txn.trace

    def update_pair_trust(
        self, observer: str, observed: str, feedback: str | None = None
    ) -> DomainPairTrust:
        """Recompute one directed pair from the observer's current ledger.

        With no first-hand evidence yet (no visitor from the observed
        domain has been rated in the observer's ledger) the stored neutral
        value is kept unchanged.
        """
        authority = self.authority(observer)
        self.authority(observed)
        if feedback is not None and feedback not in self._completed:
            raise UnknownRequest(f"{feedback} is not a completed transaction")
        foreign = {e for e in authority.ledger.entities if e.domain == observed}
        if not any(authority.ledger.raters_of(e) for e in foreign):
            return self.state.pair_trust[(observer, observed)]
        params = authority.policy.cross_params
        dtd = compute_cross_dtd(authority.ledger, foreign)
        rp = compute_cross_rp(authority.ledger, foreign, params)
        pair = DomainPairTrust(
            observer=observer,
            observed=observed,
            cross_dtd=dtd,
            cross_rp=rp,
            cross_td=combined_trust(params.delta, dtd, rp),
        )
        self.state.pair_trust[(observer, observed)] = pair
        return pair

    # --- certificates ---

    def verify_certificate(self, cert: Certificate) -> bool:
        return check_certificate(cert, self.signing_key, self.clock)
