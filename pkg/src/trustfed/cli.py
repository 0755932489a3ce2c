"""Command-line front end: validate and run scenario files, answer one-off
conversion and decision queries, and export traces and trust reports.

Exit codes: 0 success, 1 validation or identifier error, 2 I/O error.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .conversion import CorrelationSet, convert_role
from .engine import AccessRequest, Outcome
from .errors import InvalidScenario, TrustFedError
from .federation import CrossDomainRequest
from .roles import RoleId
from .scenario import Scenario, load_scenario
from .simulator import (
    build_world,
    entity_series_csv,
    pair_series_csv,
    run as run_scenario,
    trace_to_jsonl,
)
from .trust import EntityId

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


def _load(path: str) -> Scenario:
    """Load a scenario or terminate with the documented exit codes."""
    try:
        return load_scenario(path)
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    except InvalidScenario as exc:
        for violation in exc.violations:
            click.echo(f"violation: {violation}", err=True)
        sys.exit(EXIT_INVALID)


def _resolve_entity(scenario: Scenario, ref: str) -> EntityId:
    matches = []
    for spec in scenario.entities:
        if str(spec.entity) == ref or spec.entity.local_name == ref:
            matches.append(spec.entity)
    if not matches:
        click.echo(f"error: unknown entity '{ref}'", err=True)
        sys.exit(EXIT_INVALID)
    if len(matches) > 1:
        names = ", ".join(str(m) for m in matches)
        click.echo(f"error: ambiguous entity '{ref}' (matches {names})", err=True)
        sys.exit(EXIT_INVALID)
    return matches[0]


def _resolve_outer_role(scenario: Scenario, ref: str, target_domain: str) -> RoleId:
    if ":" in ref:
        domain, name = ref.split(":", 1)
        candidates = [RoleId(domain, name)]
    else:
        candidates = [RoleId(spec.name, ref) for spec in scenario.domains]
    matches = [
        role
        for role in candidates
        if role.domain != target_domain
        and any(
            spec.name == role.domain and role in spec.hierarchy.roles
            for spec in scenario.domains
        )
    ]
    if not matches:
        click.echo(f"error: unknown outer role '{ref}'", err=True)
        sys.exit(EXIT_INVALID)
    if len(matches) > 1:
        names = ", ".join(str(m) for m in matches)
        click.echo(f"error: ambiguous outer role '{ref}' (matches {names})", err=True)
        sys.exit(EXIT_INVALID)
    return matches[0]


@click.group()
def main() -> None:
    """Trust-gated RBAC across security domains: simulate, convert, decide."""


@main.command("validate")
@click.argument("scenario_path")
def cmd_validate(scenario_path: str) -> None:
    """Check a scenario file; print violations if any."""
    _load(scenario_path)
    click.echo("scenario OK")


@main.command("run")
@click.argument("scenario_path")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--out", "out_dir", default="out", show_default=True, help="Output directory.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "jsonl"]),
    default="table",
    show_default=True,
    help="What to print on stdout.",
)
def cmd_run(scenario_path: str, seed: int | None, out_dir: str, fmt: str) -> None:
    """Run a scenario and write trace + trajectory files."""
    scenario = _load(scenario_path)
    if seed is not None:
        scenario = scenario.with_seed(seed)
    result = run_scenario(scenario)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "trace.jsonl"), "w", encoding="utf-8") as fh:
            fh.write(trace_to_jsonl(result.trace))
        with open(os.path.join(out_dir, "trajectories.csv"), "w", encoding="utf-8") as fh:
            fh.write(entity_series_csv(result))
        with open(os.path.join(out_dir, "pair_trust.csv"), "w", encoding="utf-8") as fh:
            fh.write(pair_series_csv(result))
    except OSError as exc:
        click.echo(f"error: cannot write to {out_dir}: {exc}", err=True)
        sys.exit(EXIT_IO)

    if fmt == "jsonl":
        for event in result.trace:
            click.echo(event.to_json())
        return
    outcomes = {"permit": 0, "deny": 0}
    for event in result.trace:
        if event.kind in ("decision", "protocol"):
            outcomes[event.payload["outcome"]] += 1
    click.echo(f"events: {len(result.trace)}")
    click.echo(f"permits: {outcomes['permit']}  denies: {outcomes['deny']}")
    for (observer, observed), pair in sorted(
        result.world.federation.state.pair_trust.items()
    ):
        click.echo(
            f"pair trust {observer} -> {observed}: td={pair.cross_td:.6f} "
            f"(dtd={pair.cross_dtd:.6f}, rp={pair.cross_rp:.6f})"
        )
    click.echo(f"wrote trace.jsonl, trajectories.csv, pair_trust.csv to {out_dir}")


@main.command("convert-role")
@click.argument("scenario_path")
@click.argument("outer_role")
@click.argument("target_domain")
def cmd_convert_role(scenario_path: str, outer_role: str, target_domain: str) -> None:
    """Convert an outer-domain role into the target domain's local role."""
    scenario = _load(scenario_path)
    if target_domain not in {spec.name for spec in scenario.domains}:
        click.echo(f"error: unknown domain '{target_domain}'", err=True)
        sys.exit(EXIT_INVALID)
    role = _resolve_outer_role(scenario, outer_role, target_domain)
    outer = scenario.domain(role.domain).hierarchy
    local = scenario.domain(target_domain).hierarchy
    cs = None
    for candidate in scenario.correlation_sets:
        if candidate.outer_domain == role.domain and candidate.local_domain == target_domain:
            cs = candidate
            break
    if cs is None:
        cs = CorrelationSet(outer_domain=role.domain, local_domain=target_domain)
    result = convert_role(role, cs, outer, local)
    policy = cs.classification.value if cs.classification else "partial"
    click.echo(f"outer role: {role}")
    click.echo(f"policy: {policy}")
    click.echo(f"candidates: {', '.join(sorted(str(c) for c in result.candidates)) or '-'}")
    if result.via is not None:
        click.echo(
            f"via: {result.via.outer_role} -> {result.via.local_role} "
            f"({result.via.kind.value})"
        )
    if result.local_role is None:
        click.echo("converted role: no conversion (deny)")
    else:
        click.echo(f"converted role: {result.local_role}")


@main.command("decide")
@click.argument("scenario_path")
@click.argument("requester")
@click.argument("role")
@click.argument("resource")
@click.option("--cross", "cross_target", default=None, help="Target domain for a cross-domain request.")
def cmd_decide(
    scenario_path: str, requester: str, role: str, resource: str, cross_target: str | None
) -> None:
    """One-shot decision over the scenario's initial state."""
    scenario = _load(scenario_path)
    world = build_world(scenario)
    entity = _resolve_entity(scenario, requester)
    role_id = RoleId(entity.domain, role)
    try:
        if cross_target is None:
            authority = world.authority(entity.domain)
            decision, cert, pipeline = authority.authorize_local(
                AccessRequest(entity, role_id, resource, request_id="adhoc-1")
            )
            click.echo(f"outcome: {decision.outcome.value}")
            if decision.reason:
                click.echo(f"reason: {decision.reason.value}")
            click.echo(f"trust: {decision.trust_at_decision:.6f}")
            click.echo(f"stages: {' '.join(pipeline.labels)}")
            if cert is not None:
                click.echo(f"certificate: {cert.digest()}")
        else:
            request = CrossDomainRequest(
                requester=entity,
                home_domain=entity.domain,
                target_domain=cross_target,
                outer_role=role_id,
                resource=resource,
                request_id="adhoc-1",
            )
            decision, trace = world.federation.request_cross_domain_access(request)
            click.echo(f"outcome: {decision.outcome.value}")
            if decision.reason:
                click.echo(f"reason: {decision.reason.value}")
            click.echo(f"trust: {decision.trust_at_decision:.6f}")
            for step in trace.steps:
                click.echo(f"step {step.label} ({step.name}): {step.outcome}")
            if decision.outcome is Outcome.PERMIT:
                click.echo("note: feedback pending; transaction left open")
    except (TrustFedError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)


@main.command("trust-report")
@click.argument("scenario_path")
@click.option("--initial", is_flag=True, help="Report the pre-schedule state.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "jsonl"]),
    default="table",
    show_default=True,
)
def cmd_trust_report(scenario_path: str, initial: bool, fmt: str) -> None:
    """Print entity trust per domain and the pair-trust matrix."""
    scenario = _load(scenario_path)
    if initial:
        world = build_world(scenario)
    else:
        world = run_scenario(scenario).world
    rows = []
    for spec in scenario.domains:
        authority = world.authority(spec.name)
        for entity in sorted(authority.ledger.entities):
            rows.append(
                {
                    "domain": spec.name,
                    "entity": str(entity),
                    "td": authority.ledger.compute_domain_trust(entity),
                    "rp": authority.ledger.reputation_of(entity),
                }
            )
    pairs = [
        {
            "observer": observer,
            "observed": observed,
            "cross_dtd": pair.cross_dtd,
            "cross_rp": pair.cross_rp,
            "cross_td": pair.cross_td,
        }
        for (observer, observed), pair in sorted(world.federation.state.pair_trust.items())
    ]
    if fmt == "jsonl":
        for row in rows:
            click.echo(json.dumps({"kind": "entity", **row}, sort_keys=True))
        for row in pairs:
            click.echo(json.dumps({"kind": "pair", **row}, sort_keys=True))
        return
    click.echo(f"{'domain':<10} {'entity':<24} {'td':>10} {'rp':>10}")
    for row in rows:
        click.echo(
            f"{row['domain']:<10} {row['entity']:<24} {row['td']:>10.6f} {row['rp']:>10.6f}"
        )
    if pairs:
        click.echo(f"{'observer':<10} {'observed':<10} {'dtd':>10} {'rp':>10} {'td':>10}")
        for row in pairs:
            click.echo(
                f"{row['observer']:<10} {row['observed']:<10} "
                f"{row['cross_dtd']:>10.6f} {row['cross_rp']:>10.6f} {row['cross_td']:>10.6f}"
            )


if __name__ == "__main__":
    main()
