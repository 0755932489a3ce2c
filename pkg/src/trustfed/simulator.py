"""Deterministic, seeded replay of a scenario.

Builds the federation world (domains, entities, correlation sets), applies
any seeded experiences, then walks the schedule one event at a time:

* ``local_request`` — authorize in the requester's home domain; on permit
  both parties rate each other, the experience values sampled from the
  rated party's behavior profile.
* ``cross_request`` — run the twelve-step cross-domain protocol; on permit
  both feedback sides are filed immediately, completing the transaction.
* ``epoch_advance`` — roll one domain's trust snapshot and sample
  trajectories.

Time is the event counter; nothing depends on the wall clock. Two runs of
the same scenario and seed produce byte-identical trace output.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .engine import AccessRequest, Credential, DomainAuthority, Outcome
from .federation import CrossDomainRequest, Federation
from .scenario import (
    BehaviorProfile,
    Scenario,
    ScheduleEvent,
    load_scenario,
    parse_scenario,
    validate_scenario,
)
from .trust import EntityId

__all__ = [
    "TraceEvent",
    "SimulationResult",
    "World",
    "build_world",
    "run",
    "trace_to_jsonl",
    "entity_series_csv",
    "pair_series_csv",
    "load_scenario",
    "parse_scenario",
    "validate_scenario",
]

NEUTRAL_PROFILE = BehaviorProfile("neutral", mean=0.0, spread=0.0)


@dataclass
class TraceEvent:
    """One line of the simulation's event log."""

    seq: int
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass
class World:
    """A built scenario: the federation plus entity behavior lookups."""

    scenario: Scenario
    federation: Federation
    profile_of: dict[EntityId, BehaviorProfile]

    def authority(self, domain: str) -> DomainAuthority:
        return self.federation.authority(domain)


@dataclass
class SimulationResult:
    trace: list[TraceEvent]
    entity_series: list[dict] = field(default_factory=list)
    pair_series: list[dict] = field(default_factory=list)
    world: World | None = None


def build_world(scenario: Scenario) -> World:
    """Stand up the federation described by a parsed scenario."""
    federation = Federation(
        interdomain_threshold=scenario.interdomain_threshold,
        mutual_update=scenario.mutual_update,
    )
    for spec in scenario.domains:
        federation.register_domain(spec.name, spec.hierarchy, spec.policy)
    profile_of: dict[EntityId, BehaviorProfile] = {}
    for ent in scenario.entities:
        authority = federation.authority(ent.entity.domain)
        authority.register_entity(ent.entity, ent.secret)
        for role in ent.roles:
            authority.assign_role(ent.entity, role)
        profile_of[ent.entity] = scenario.profiles.get(ent.profile, NEUTRAL_PROFILE)
    for spec in scenario.domains:
        authority = federation.authority(spec.name)
        for resource, owner in sorted(spec.resources.items()):
            authority.register_resource(resource, owner)
    for cs in scenario.correlation_sets:
        federation.install_correlations(cs)
    for seeded in scenario.seed_experiences:
        authority = federation.authority(seeded.domain)
        authority.ledger.register(seeded.rater)
        authority.ledger.register(seeded.ratee)
        for _ in range(seeded.repeat):
            authority.ledger.record_experience(seeded.rater, seeded.ratee, seeded.ex)
    for ent in scenario.entities:
        authority = federation.authority(ent.entity.domain)
        authority.authenticate(Credential(ent.entity, ent.secret))
    return World(scenario=scenario, federation=federation, profile_of=profile_of)


class _Runner:
    def __init__(self, world: World):
        self.world = world
        self.scenario = world.scenario
        self.trace: list[TraceEvent] = []
        self.entity_series: list[dict] = []
        self.pair_series: list[dict] = []

    def emit(self, kind: str, **payload) -> TraceEvent:
        event = TraceEvent(seq=len(self.trace), kind=kind, payload=payload)
        self.trace.append(event)
        return event

    def sample_rating(self, event_index: int, ratee: EntityId) -> float:
        profile = self.world.profile_of.get(ratee, NEUTRAL_PROFILE)
        return profile.sample(self.scenario.seed, event_index, str(ratee))

    def sample_trajectories(self, seq: int, domains: list[str]) -> None:
        federation = self.world.federation
        for name in domains:
            authority = federation.authority(name)
            view = authority.ledger.view
            for entity in sorted(authority.ledger.entities):
                if entity in view.domain_trust:
                    td = view.domain_trust[entity]
                else:
                    td = authority.ledger.compute_domain_trust(entity)
                self.entity_series.append(
                    {
                        "seq": seq,
                        "epoch": view.epoch,
                        "domain": name,
                        "entity": str(entity),
                        "td": td,
                    }
                )
        for (observer, observed), pair in sorted(federation.state.pair_trust.items()):
            self.pair_series.append(
                {
                    "seq": seq,
                    "observer": observer,
                    "observed": observed,
                    "cross_dtd": pair.cross_dtd,
                    "cross_rp": pair.cross_rp,
                    "cross_td": pair.cross_td,
                }
            )

    # --- event handlers ---

    def run_local(self, index: int, event: ScheduleEvent) -> None:
        authority = self.world.authority(event.requester.domain)
        request_id = f"evt-{index:05d}"
        request = AccessRequest(
            requester=event.requester,
            role=event.role,
            resource=event.resource,
            request_id=request_id,
        )
        decision, cert, pipeline = authority.authorize_local(request)
        self.emit(
            "decision",
            request_id=request_id,
            domain=event.requester.domain,
            requester=str(event.requester),
            role=str(event.role),
            resource=event.resource,
            outcome=decision.outcome.value,
            reason=decision.reason.value if decision.reason else None,
            trust=decision.trust_at_decision,
            certificate=cert.digest() if cert else None,
            pipeline=pipeline.to_dict(),
        )
        if decision.outcome is Outcome.PERMIT:
            owner = authority.resources[event.resource]
            self._apply_local_feedback(index, authority, request_id, event.requester, owner)

    def _apply_local_feedback(
        self,
        index: int,
        authority: DomainAuthority,
        request_id: str,
        requester: EntityId,
        owner: EntityId,
    ) -> None:
        for rater, ratee in ((requester, owner), (owner, requester)):
            ex = self.sample_rating(index, ratee)
            record = authority.post_interaction_feedback(rater, ratee, ex)
            self.emit(
                "feedback",
                request_id=request_id,
                domain=authority.domain,
                rater=str(rater),
                ratee=str(ratee),
                ex=ex,
                qos=record.qos,
                dtd=record.dtd,
                k=record.k,
            )

    def run_cross(self, index: int, event: ScheduleEvent) -> None:
        federation = self.world.federation
        request_id = f"evt-{index:05d}"
        request = CrossDomainRequest(
            requester=event.requester,
            home_domain=event.requester.domain,
            target_domain=event.target,
            outer_role=event.role,
            resource=event.resource,
            request_id=request_id,
        )
        decision, ptrace = federation.request_cross_domain_access(request)
        feedback_payloads: list[dict] = []
        if decision.outcome is Outcome.PERMIT:
            target = federation.authority(event.target)
            home = federation.authority(event.requester.domain)
            provider = target.resources[event.resource]
            visitor_ex = self.sample_rating(index, provider)
            provider_ex = self.sample_rating(index, event.requester)
            federation.submit_feedback(request_id, event.requester, visitor_ex)
            federation.submit_feedback(request_id, provider, provider_ex)
            home_rec = home.ledger.pairwise[(event.requester, provider)]
            host_rec = target.ledger.pairwise[(provider, event.requester)]
            feedback_payloads = [
                {
                    "request_id": request_id,
                    "domain": home.domain,
                    "rater": str(event.requester),
                    "ratee": str(provider),
                    "ex": visitor_ex,
                    "qos": home_rec.qos,
                    "dtd": home_rec.dtd,
                    "k": home_rec.k,
                },
                {
                    "request_id": request_id,
                    "domain": target.domain,
                    "rater": str(provider),
                    "ratee": str(event.requester),
                    "ex": provider_ex,
                    "qos": host_rec.qos,
                    "dtd": host_rec.dtd,
                    "k": host_rec.k,
                },
            ]
        self.emit(
            "protocol",
            request_id=request_id,
            requester=str(event.requester),
            outer_role=str(event.role),
            target=event.target,
            resource=event.resource,
            outcome=decision.outcome.value,
            reason=decision.reason.value if decision.reason else None,
            trust=decision.trust_at_decision,
            steps=ptrace.to_dict()["steps"],
        )
        for payload in feedback_payloads:
            self.emit("feedback", **payload)

    def run_epoch(self, event: ScheduleEvent) -> None:
        authority = self.world.authority(event.domain)
        view = authority.advance_epoch()
        epoch_event = self.emit("epoch", domain=event.domain, epoch=view.epoch)
        self.sample_trajectories(epoch_event.seq, [event.domain])

    def run_all(self) -> SimulationResult:
        self.sample_trajectories(-1, [spec.name for spec in self.scenario.domains])
        for index, event in enumerate(self.scenario.schedule):
            if event.kind == "local_request":
                self.run_local(index, event)
            elif event.kind == "cross_request":
                self.run_cross(index, event)
            else:
                self.run_epoch(event)
        return SimulationResult(
            trace=self.trace,
            entity_series=self.entity_series,
            pair_series=self.pair_series,
            world=self.world,
        )


def run(scenario: Scenario) -> SimulationResult:
    """Replay a parsed scenario deterministically."""
    world = build_world(scenario)
    return _Runner(world).run_all()


# --- export formats ---


def trace_to_jsonl(trace: list[TraceEvent]) -> str:
    """Line-delimited structured records, one event per line."""
    return "".join(event.to_json() + "\n" for event in trace)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def entity_series_csv(result: SimulationResult) -> str:
    return _csv(result.entity_series, ["seq", "epoch", "domain", "entity", "td"])


def pair_series_csv(result: SimulationResult) -> str:
    return _csv(
        result.pair_series,
        ["seq", "observer", "observed", "cross_dtd", "cross_rp", "cross_td"],
    )
