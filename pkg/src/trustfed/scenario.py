"""Declarative scenario files: parsing and validation.

A scenario is one JSON document with sections ``profiles``, ``domains``,
``entities``, ``correlations``, ``federation``, ``seed_experiences`` and
``schedule`` (see the bundled files under ``scenarios/`` for the full
shape). Parsing is two-phase: ``validate_scenario`` collects every
violation with its location, and ``parse_scenario`` builds the typed
Scenario only when the document is clean.

Entity references are either qualified ``"DOMAIN:name"`` strings or bare
local names when those are unambiguous across the whole scenario.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace

from .conversion import Correlation, CorrelationKind, CorrelationSet, classify_policy
from .crossdomain import CrossParams
from .engine import PolicyDatabase
from .errors import InvalidScenario
from .roles import PermissionId, RoleHierarchy, RoleId
from .trust import EntityId, TrustParams

# Samples are clamped strictly inside the open rating interval.
EX_MARGIN = 1e-9

EVENT_KINDS = ("local_request", "cross_request", "epoch_advance")


@dataclass(frozen=True)
class BehaviorProfile:
    """How an entity behaves, as seen by whoever rates it.

    Gaussian profiles draw ``mean + spread * N(0, 1)`` clamped into the
    open interval; oscillating profiles alternate the sign of a fixed
    magnitude every ``period`` events. Sampling is a pure function of
    (seed, event index, salt).
    """

    name: str
    mean: float = 0.0
    spread: float = 0.0
    magnitude: float | None = None
    period: int | None = None

    def __post_init__(self) -> None:
        if self.oscillating:
            if not (self.magnitude and 0.0 < self.magnitude < 1.0):
                raise ValueError(f"profile {self.name}: magnitude must lie in (0, 1)")
            if not (isinstance(self.period, int) and self.period >= 1):
                raise ValueError(f"profile {self.name}: period must be an integer >= 1")
        else:
            if not (math.isfinite(self.mean) and -1.0 < self.mean < 1.0):
                raise ValueError(f"profile {self.name}: mean must lie strictly inside (-1, 1)")
            if not (math.isfinite(self.spread) and self.spread >= 0.0):
                raise ValueError(f"profile {self.name}: spread must be >= 0")

    @property
    def oscillating(self) -> bool:
        return self.period is not None or self.magnitude is not None

    def sample(self, seed: int, event_index: int, salt: str) -> float:
        if self.oscillating:
            sign = 1.0 if (event_index // self.period) % 2 == 0 else -1.0
            return sign * self.magnitude
        rng = random.Random(f"{seed}:{event_index}:{salt}")
        value = self.mean + self.spread * rng.gauss(0.0, 1.0)
        return max(-1.0 + EX_MARGIN, min(1.0 - EX_MARGIN, value))


@dataclass
class DomainSpec:
    name: str
    hierarchy: RoleHierarchy
    policy: PolicyDatabase
    resources: dict[str, EntityId] = field(default_factory=dict)


@dataclass
class EntitySpec:
    entity: EntityId
    profile: str
    secret: str
    roles: tuple[RoleId, ...] = ()


@dataclass
class SeedExperience:
    domain: str
    rater: EntityId
    ratee: EntityId
    ex: float
    repeat: int = 1


@dataclass
class ScheduleEvent:
    kind: str
    requester: EntityId | None = None
    role: RoleId | None = None
    resource: str | None = None
    target: str | None = None
    domain: str | None = None


@dataclass
class Scenario:
    seed: int
    profiles: dict[str, BehaviorProfile]
    domains: list[DomainSpec]
    entities: list[EntitySpec]
    correlation_sets: list[CorrelationSet]
    interdomain_threshold: float = 0.0
    mutual_update: bool = True
    seed_experiences: list[SeedExperience] = field(default_factory=list)
    schedule: list[ScheduleEvent] = field(default_factory=list)
    epochs: int | None = None

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)

    def domain(self, name: str) -> DomainSpec:
        for spec in self.domains:
            if spec.name == name:
                return spec
        raise KeyError(name)


def load_scenario(path: str) -> Scenario:
    """Read and parse a scenario file; raises InvalidScenario when dirty."""
    with open(path, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InvalidScenario([f"document: not valid JSON ({exc})"]) from exc
    return parse_scenario(doc)


def parse_scenario(doc: dict) -> Scenario:
    scenario, violations = _build(doc)
    if violations:
        raise InvalidScenario(violations)
    assert scenario is not None
    return scenario


def validate_scenario(doc: dict) -> list[str]:
    """All violations in the document; empty means it parses clean."""
    _, violations = _build(doc)
    return violations


# --- internals ---


def _build(doc) -> tuple[Scenario | None, list[str]]:
    v: list[str] = []
    if not isinstance(doc, dict):
        return None, ["document: must be a JSON object"]

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        v.append("seed: must be an integer")
        seed = 0

    profiles = _build_profiles(doc.get("profiles", {}), v)
    hierarchies, raw_domains = _build_hierarchies(doc.get("domains", []), v)
    entities, entity_index = _build_entities(doc.get("entities", []), hierarchies, profiles, v)

    resolver = _Resolver(entity_index, v)
    domains = _finish_domains(raw_domains, hierarchies, resolver, v)
    correlation_sets = _build_correlations(doc.get("correlations", []), hierarchies, v)

    federation = doc.get("federation", {})
    threshold = 0.0
    mutual = True
    if not isinstance(federation, dict):
        v.append("federation: must be an object")
    else:
        threshold = federation.get("interdomain_threshold", 0.0)
        if not (isinstance(threshold, (int, float)) and -1.0 <= threshold <= 1.0):
            v.append("federation.interdomain_threshold: must lie in [-1, 1]")
            threshold = 0.0
        mutual = federation.get("mutual_update", True)
        if not isinstance(mutual, bool):
            v.append("federation.mutual_update: must be a boolean")
            mutual = True

    seeds = _build_seed_experiences(
        doc.get("seed_experiences", []), hierarchies, resolver, v
    )
    schedule = _build_schedule(
        doc.get("schedule", []), hierarchies, entities, raw_domains, resolver, v
    )

    epochs = doc.get("epochs")
    if epochs is not None:
        if isinstance(epochs, bool) or not isinstance(epochs, int) or epochs < 0:
            v.append("epochs: must be a non-negative integer")
        else:
            actual = sum(1 for e in schedule if e.kind == "epoch_advance")
            if actual != epochs:
                v.append(
                    f"epochs: declares {epochs} but the schedule contains "
                    f"{actual} epoch_advance events"
                )

    if v:
        return None, v
    return (
        Scenario(
            seed=seed,
            profiles=profiles,
            domains=domains,
            entities=entities,
            correlation_sets=correlation_sets,
            interdomain_threshold=float(threshold),
            mutual_update=mutual,
            seed_experiences=seeds,
            schedule=schedule,
            epochs=epochs,
        ),
        [],
    )


class _Resolver:
    """Resolve "DOMAIN:name" or bare-name entity references."""

    def __init__(self, index: dict[str, list[EntityId]], violations: list[str]):
        self.index = index
        self.violations = violations

    def resolve(self, ref, where: str) -> EntityId | None:
        if not isinstance(ref, str) or not ref:
            self.violations.append(f"{where}: entity reference must be a non-empty string")
            return None
        if ":" in ref:
            domain, name = ref.split(":", 1)
            for candidate in self.index.get(name, []):
                if candidate.domain == domain:
                    return candidate
            self.violations.append(f"{where}: unknown entity '{ref}'")
            return None
        candidates = self.index.get(ref, [])
        if not candidates:
            self.violations.append(f"{where}: unknown entity '{ref}'")
            return None
        if len(candidates) > 1:
            names = ", ".join(str(c) for c in candidates)
            self.violations.append(f"{where}: ambiguous entity '{ref}' (matches {names})")
            return None
        return candidates[0]


def _build_profiles(raw, v: list[str]) -> dict[str, BehaviorProfile]:
    profiles: dict[str, BehaviorProfile] = {}
    if not isinstance(raw, dict):
        v.append("profiles: must be an object")
        return profiles
    for name, spec in raw.items():
        where = f"profiles.{name}"
        if not isinstance(spec, dict):
            v.append(f"{where}: must be an object")
            continue
        try:
            if "magnitude" in spec or "period" in spec:
                profiles[name] = BehaviorProfile(
                    name=name,
                    magnitude=spec.get("magnitude"),
                    period=spec.get("period"),
                )
            else:
                profiles[name] = BehaviorProfile(
                    name=name,
                    mean=spec.get("mean", 0.0),
                    spread=spec.get("spread", 0.0),
                )
        except (ValueError, TypeError) as exc:
            v.append(f"{where}: {exc}")
    return profiles


def _build_hierarchies(raw, v: list[str]) -> tuple[dict[str, RoleHierarchy], list[dict]]:
    hierarchies: dict[str, RoleHierarchy] = {}
    raw_domains: list[dict] = []
    if not isinstance(raw, list):
        v.append("domains: must be a list")
        return hierarchies, raw_domains
    for i, block in enumerate(raw):
        where = f"domains[{i}]"
        if not isinstance(block, dict) or not isinstance(block.get("name"), str):
            v.append(f"{where}: must be an object with a 'name'")
            continue
        name = block["name"]
        if name in hierarchies:
            v.append(f"{where}: duplicate domain '{name}'")
            continue
        roles: set[RoleId] = set()
        edges: set[tuple[RoleId, RoleId]] = set()
        permissions: dict[RoleId, frozenset[PermissionId]] = {}
        declared: dict[str, dict] = {}
        for j, role_block in enumerate(block.get("roles", [])):
            rwhere = f"{where}.roles[{j}]"
            if not isinstance(role_block, dict) or not isinstance(role_block.get("name"), str):
                v.append(f"{rwhere}: must be an object with a 'name'")
                continue
            rname = role_block["name"]
            if rname in declared:
                v.append(f"{rwhere}: duplicate role '{rname}'")
                continue
            declared[rname] = role_block
            try:
                role = RoleId(name, rname)
            except ValueError as exc:
                v.append(f"{rwhere}: {exc}")
                continue
            roles.add(role)
            perms = set()
            for k, perm in enumerate(role_block.get("permissions", [])):
                pwhere = f"{rwhere}.permissions[{k}]"
                if not isinstance(perm, dict):
                    v.append(f"{pwhere}: must be an object")
                    continue
                try:
                    perms.add(PermissionId(perm.get("name", ""), perm.get("resource", "")))
                except (ValueError, TypeError) as exc:
                    v.append(f"{pwhere}: {exc}")
            permissions[role] = frozenset(perms)
        for rname, role_block in declared.items():
            for parent in role_block.get("parents", []):
                if parent not in declared:
                    v.append(f"{where}: role '{rname}' lists unknown parent '{parent}'")
                else:
                    edges.add((RoleId(name, parent), RoleId(name, rname)))
        guest_name = block.get("guest")
        guest = None
        if isinstance(guest_name, str) and guest_name in declared:
            guest = RoleId(name, guest_name)
        elif guest_name is not None:
            v.append(f"{where}: guest '{guest_name}' is not a declared role")
        hierarchy = RoleHierarchy(
            domain=name,
            roles=frozenset(roles),
            edges=frozenset(edges),
            permissions=permissions,
            guest=guest,
        )
        for violation in hierarchy.validate():
            v.append(f"{where}: {violation}")
        hierarchies[name] = hierarchy
        raw_domains.append(block)
    return hierarchies, raw_domains


def _build_entities(
    raw,
    hierarchies: dict[str, RoleHierarchy],
    profiles: dict[str, BehaviorProfile],
    v: list[str],
) -> tuple[list[EntitySpec], dict[str, list[EntityId]]]:
    entities: list[EntitySpec] = []
    index: dict[str, list[EntityId]] = {}
    if not isinstance(raw, list):
        v.append("entities: must be a list")
        return entities, index
    seen: set[EntityId] = set()
    for i, block in enumerate(raw):
        where = f"entities[{i}]"
        if not isinstance(block, dict):
            v.append(f"{where}: must be an object")
            continue
        name = block.get("name")
        domain = block.get("domain")
        if not isinstance(name, str) or not name or not isinstance(domain, str):
            v.append(f"{where}: needs string 'name' and 'domain'")
            continue
        if domain not in hierarchies:
            v.append(f"{where}: unknown domain '{domain}'")
            continue
        entity = EntityId(domain, name)
        if entity in seen:
            v.append(f"{where}: duplicate entity '{entity}'")
            continue
        seen.add(entity)
        profile = block.get("profile", "")
        if profile and profile not in profiles:
            v.append(f"{where}: unknown profile '{profile}'")
        roles: list[RoleId] = []
        for rname in block.get("roles", []):
            role = RoleId(domain, rname) if isinstance(rname, str) and rname else None
            if role is None or role not in hierarchies[domain].roles:
                v.append(f"{where}: unknown role '{rname}' in {domain}")
            else:
                roles.append(role)
        secret = block.get("secret", f"{name}-secret")
        if not isinstance(secret, str) or not secret:
            v.append(f"{where}: secret must be a non-empty string")
            secret = f"{name}-secret"
        entities.append(
            EntitySpec(entity=entity, profile=profile, secret=secret, roles=tuple(roles))
        )
        index.setdefault(name, []).append(entity)
    return entities, index


def _finish_domains(
    raw_domains: list[dict],
    hierarchies: dict[str, RoleHierarchy],
    resolver: _Resolver,
    v: list[str],
) -> list[DomainSpec]:
    specs: list[DomainSpec] = []
    for block in raw_domains:
        name = block["name"]
        where = f"domains.{name}"
        policy = _build_policy(block.get("policy", {}), f"{where}.policy", resolver, v)
        resources: dict[str, EntityId] = {}
        for j, res in enumerate(block.get("resources", [])):
            rwhere = f"{where}.resources[{j}]"
            if not isinstance(res, dict) or not isinstance(res.get("name"), str):
                v.append(f"{rwhere}: must be an object with a 'name'")
                continue
            rname = res["name"]
            if rname in resources:
                v.append(f"{rwhere}: duplicate resource '{rname}'")
                continue
            owner_ref = res.get("owner")
            if owner_ref is None:
                v.append(f"{rwhere}: resource needs an 'owner'")
                continue
            if isinstance(owner_ref, str) and ":" not in owner_ref:
                owner_ref = f"{name}:{owner_ref}"
            owner = resolver.resolve(owner_ref, rwhere)
            if owner is None:
                continue
            if owner.domain != name:
                v.append(f"{rwhere}: owner {owner} does not live in {name}")
                continue
            resources[rname] = owner
        specs.append(
            DomainSpec(
                name=name,
                hierarchy=hierarchies[name],
                policy=policy,
                resources=resources,
            )
        )
    return specs


def _build_policy(raw, where: str, resolver: _Resolver, v: list[str]) -> PolicyDatabase:
    if not isinstance(raw, dict):
        v.append(f"{where}: must be an object")
        raw = {}
    trust_params = TrustParams()
    try:
        trust_params = TrustParams(
            alpha=raw.get("alpha", 0.5),
            beta=raw.get("beta", 0.5),
            gamma=raw.get("gamma", 0.5),
            initial_qos=raw.get("initial_qos", 0.0),
            initial_dtd=raw.get("initial_dtd", 0.0),
            initial_rp=raw.get("initial_rp", 0.5),
        )
    except (ValueError, TypeError) as exc:
        v.append(f"{where}: {exc}")
    theta: dict[EntityId, float] = {}
    raw_theta = raw.get("theta", {})
    if not isinstance(raw_theta, dict):
        v.append(f"{where}.theta: must be an object")
        raw_theta = {}
    for ref, weight in raw_theta.items():
        entity = resolver.resolve(ref, f"{where}.theta")
        if entity is None:
            continue
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            v.append(f"{where}.theta[{ref}]: weight must be a number")
            continue
        theta[entity] = float(weight)
    cross_params = CrossParams()
    try:
        cross_params = CrossParams(delta=raw.get("delta", 0.5), theta=theta)
    except (ValueError, TypeError) as exc:
        v.append(f"{where}: {exc}")
    thresholds = raw.get("resource_thresholds", {})
    if not isinstance(thresholds, dict):
        v.append(f"{where}.resource_thresholds: must be an object")
        thresholds = {}
    policy = PolicyDatabase()
    try:
        policy = PolicyDatabase(
            trust_params=trust_params,
            cross_params=cross_params,
            permit_threshold=raw.get("permit_threshold", 0.25),
            resource_thresholds={str(k): t for k, t in thresholds.items()},
        )
    except (ValueError, TypeError) as exc:
        v.append(f"{where}: {exc}")
    return policy


def _build_correlations(
    raw, hierarchies: dict[str, RoleHierarchy], v: list[str]
) -> list[CorrelationSet]:
    sets: list[CorrelationSet] = []
    if not isinstance(raw, list):
        v.append("correlations: must be a list")
        return sets
    seen_pairs: set[tuple[str, str]] = set()
    kinds = {
        "transitive": CorrelationKind.TRANSITIVE,
        "non_transitive": CorrelationKind.NON_TRANSITIVE,
    }
    for i, block in enumerate(raw):
        where = f"correlations[{i}]"
        if not isinstance(block, dict):
            v.append(f"{where}: must be an object")
            continue
        outer = block.get("outer")
        local = block.get("local")
        if outer not in hierarchies or local not in hierarchies:
            v.append(f"{where}: unknown domain pair ({outer}, {local})")
            continue
        if outer == local:
            v.append(f"{where}: outer and local domains must differ")
            continue
        if (outer, local) in seen_pairs:
            v.append(f"{where}: duplicate correlation set for ({outer}, {local})")
            continue
        seen_pairs.add((outer, local))
        correlations: set[Correlation] = set()
        ok = True
        for j, entry in enumerate(block.get("map", [])):
            ewhere = f"{where}.map[{j}]"
            if not isinstance(entry, dict):
                v.append(f"{ewhere}: must be an object")
                ok = False
                continue
            kind = kinds.get(entry.get("kind", "transitive"))
            if kind is None:
                v.append(f"{ewhere}: kind must be 'transitive' or 'non_transitive'")
                ok = False
                continue
            outer_role = RoleId(outer, entry.get("from", "")) if entry.get("from") else None
            local_role = RoleId(local, entry.get("to", "")) if entry.get("to") else None
            if outer_role is None or outer_role not in hierarchies[outer].roles:
                v.append(f"{ewhere}: unknown outer role '{entry.get('from')}'")
                ok = False
                continue
            if local_role is None or local_role not in hierarchies[local].roles:
                v.append(f"{ewhere}: unknown local role '{entry.get('to')}'")
                ok = False
                continue
            correlations.add(Correlation(outer_role, local_role, kind))
        if not ok:
            continue
        cs = CorrelationSet(
            outer_domain=outer, local_domain=local, correlations=frozenset(correlations)
        )
        classify_policy(cs, hierarchies[outer], hierarchies[local])
        sets.append(cs)
    return sets


def _build_seed_experiences(
    raw, hierarchies: dict[str, RoleHierarchy], resolver: _Resolver, v: list[str]
) -> list[SeedExperience]:
    seeds: list[SeedExperience] = []
    if not isinstance(raw, list):
        v.append("seed_experiences: must be a list")
        return seeds
    for i, block in enumerate(raw):
        where = f"seed_experiences[{i}]"
        if not isinstance(block, dict):
            v.append(f"{where}: must be an object")
            continue
        rater = resolver.resolve(block.get("rater"), where)
        ratee = resolver.resolve(block.get("ratee"), where)
        if rater is None or ratee is None:
            continue
        if rater == ratee:
            v.append(f"{where}: rater and ratee must differ")
            continue
        ex = block.get("ex")
        if not isinstance(ex, (int, float)) or isinstance(ex, bool) or not -1.0 < ex < 1.0:
            v.append(f"{where}: ex must lie strictly inside (-1, 1)")
            continue
        repeat = block.get("repeat", 1)
        if isinstance(repeat, bool) or not isinstance(repeat, int) or repeat < 1:
            v.append(f"{where}: repeat must be a positive integer")
            continue
        domain = block.get("domain", ratee.domain)
        if domain not in hierarchies:
            v.append(f"{where}: unknown domain '{domain}'")
            continue
        seeds.append(SeedExperience(domain, rater, ratee, float(ex), repeat))
    return seeds


def _build_schedule(
    raw,
    hierarchies: dict[str, RoleHierarchy],
    entities: list[EntitySpec],
    raw_domains: list[dict],
    resolver: _Resolver,
    v: list[str],
) -> list[ScheduleEvent]:
    schedule: list[ScheduleEvent] = []
    if not isinstance(raw, list):
        v.append("schedule: must be a list")
        return schedule
    roles_held = {spec.entity: set(spec.roles) for spec in entities}
    domain_resources: dict[str, dict[str, str]] = {}
    for block in raw_domains:
        name = block["name"]
        domain_resources[name] = {}
        for res in block.get("resources", []):
            if isinstance(res, dict) and isinstance(res.get("name"), str):
                owner = res.get("owner", "")
                if isinstance(owner, str) and ":" not in owner:
                    owner = f"{name}:{owner}"
                domain_resources[name][res["name"]] = owner

    for i, block in enumerate(raw):
        where = f"schedule[{i}]"
        if not isinstance(block, dict):
            v.append(f"{where}: must be an object")
            continue
        kind = block.get("kind")
        if kind not in EVENT_KINDS:
            v.append(f"{where}: kind must be one of {', '.join(EVENT_KINDS)}")
            continue

        if kind == "epoch_advance":
            domain = block.get("domain")
            if domain not in hierarchies:
                v.append(f"{where}: unknown domain '{domain}'")
                continue
            schedule.append(ScheduleEvent(kind=kind, domain=domain))
            continue

        requester = resolver.resolve(block.get("requester"), where)
        if requester is None:
            continue
        role_name = block.get("role")
        role = (
            RoleId(requester.domain, role_name)
            if isinstance(role_name, str) and role_name
            else None
        )
        if role is None or role not in hierarchies[requester.domain].roles:
            v.append(f"{where}: unknown role '{role_name}' in {requester.domain}")
            continue
        if role not in roles_held.get(requester, ()):
            v.append(f"{where}: {requester} does not hold role '{role_name}'")
            continue
        resource = block.get("resource")
        if not isinstance(resource, str) or not resource:
            v.append(f"{where}: resource must be a non-empty string")
            continue

        if kind == "local_request":
            owner_ref = domain_resources.get(requester.domain, {}).get(resource)
            if owner_ref is None:
                v.append(f"{where}: unknown resource '{resource}' in {requester.domain}")
                continue
            if owner_ref == str(requester):
                v.append(f"{where}: requester {requester} owns '{resource}'")
                continue
            schedule.append(
                ScheduleEvent(kind=kind, requester=requester, role=role, resource=resource)
            )
        else:
            target = block.get("target")
            if target not in hierarchies:
                v.append(f"{where}: unknown target domain '{target}'")
                continue
            if target == requester.domain:
                v.append(f"{where}: target domain must differ from the home domain")
                continue
            if resource not in domain_resources.get(target, {}):
                v.append(f"{where}: unknown resource '{resource}' in {target}")
                continue
            schedule.append(
                ScheduleEvent(
                    kind=kind, requester=requester, role=role, resource=resource, target=target
                )
            )
    return schedule
