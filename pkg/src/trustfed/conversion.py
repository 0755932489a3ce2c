"""Conversion of outer-domain roles into local roles via typed correlations.

A correlation maps one outer role to one local role and is either
transitive (every outer role strictly above the mapped one inherits the
correlation) or non-transitive (exact role only). A correlation set is
classified as:

* clear — every outer role has at least one explicit correlation;
* default — the only correlation is outer-guest -> local-guest;
* partial — anything else with at least one correlation.

Conversion collects the candidate local roles an outer role can reach,
falls back to the local guest when nothing matched but a guest -> guest
correlation exists, and picks the highest candidate in the local
hierarchy. Incomparable maxima are resolved deterministically by the
lexicographically smallest role name.

All functions are pure over immutable hierarchies and correlation sets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import UnknownRole
from .roles import PermissionId, RoleHierarchy, RoleId


class CorrelationKind(enum.Enum):
    TRANSITIVE = "transitive"
    NON_TRANSITIVE = "non_transitive"


class PolicyClass(enum.Enum):
    DEFAULT = "default"
    CLEAR = "clear"
    PARTIAL = "partial"


@dataclass(frozen=True, order=True)
class Correlation:
    """One mapping from an outer-domain role to a local role."""

    outer_role: RoleId
    local_role: RoleId
    kind: CorrelationKind = CorrelationKind.TRANSITIVE

    def __post_init__(self) -> None:
        if self.outer_role.domain == self.local_role.domain:
            raise ValueError("correlation must cross domains")


@dataclass
class CorrelationSet:
    """All correlations from one outer domain into one local domain."""

    outer_domain: str
    local_domain: str
    correlations: frozenset[Correlation] = frozenset()
    classification: PolicyClass | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.outer_domain == self.local_domain:
            raise ValueError("outer and local domains must differ")
        self.correlations = frozenset(self.correlations)
        for c in self.correlations:
            if c.outer_role.domain != self.outer_domain or c.local_role.domain != self.local_domain:
                raise ValueError(
                    f"correlation {c.outer_role} -> {c.local_role} does not run "
                    f"from {self.outer_domain} to {self.local_domain}"
                )

    def default_correlation(
        self, outer: RoleHierarchy, local: RoleHierarchy
    ) -> Correlation | None:
        """The outer-guest -> local-guest correlation, if configured."""
        if outer.guest is None or local.guest is None:
            return None
        for c in sorted(self.correlations):
            if c.outer_role == outer.guest and c.local_role == local.guest:
                return c
        return None


@dataclass(frozen=True)
class ConversionResult:
    """Outcome of converting one outer role: the chosen local role (or none
    when the request must be denied), all candidates, and the winning
    correlation."""

    local_role: RoleId | None
    candidates: frozenset[RoleId]
    via: Correlation | None


def _check_members(cs: CorrelationSet, outer: RoleHierarchy, local: RoleHierarchy) -> None:
    for c in sorted(cs.correlations):
        if c.outer_role not in outer.roles:
            raise UnknownRole(f"correlated outer role {c.outer_role} not in hierarchy")
        if c.local_role not in local.roles:
            raise UnknownRole(f"correlated local role {c.local_role} not in hierarchy")


def classify_policy(
    cs: CorrelationSet, outer: RoleHierarchy, local: RoleHierarchy
) -> PolicyClass:
    """Classify the set as clear, default, or partial (precedence in that
    order) and cache the result on the set."""
    _check_members(cs, outer, local)
    mapped = {c.outer_role for c in cs.correlations}
    if outer.roles <= mapped:
        result = PolicyClass.CLEAR
    elif len(cs.correlations) == 1 and cs.default_correlation(outer, local) is not None:
        result = PolicyClass.DEFAULT
    else:
        result = PolicyClass.PARTIAL
    cs.classification = result
    return result


def candidate_roles(
    outer_role: RoleId, cs: CorrelationSet, outer: RoleHierarchy
) -> frozenset[RoleId]:
    """Local roles reachable from an outer role.

    Direct correlations of any kind apply; transitive correlations are
    additionally inherited by every outer role strictly above the
    correlated one. Descendants never inherit.
    """
    outer._require(outer_role)
    candidates: set[RoleId] = set()
    for c in cs.correlations:
        if c.outer_role == outer_role:
            candidates.add(c.local_role)
        elif c.kind is CorrelationKind.TRANSITIVE and outer.strictly_above(
            outer_role, c.outer_role
        ):
            candidates.add(c.local_role)
    return frozenset(candidates)


def _winning_correlation(
    outer_role: RoleId, cs: CorrelationSet, chosen: RoleId, outer: RoleHierarchy
) -> Correlation | None:
    contributors = [
        c
        for c in cs.correlations
        if c.local_role == chosen
        and (
            c.outer_role == outer_role
            or (
                c.kind is CorrelationKind.TRANSITIVE
                and outer.strictly_above(outer_role, c.outer_role)
            )
        )
    ]
    if not contributors:
        return None
    contributors.sort(key=lambda c: (c.outer_role != outer_role, c.outer_role.name, c.kind.value))
    return contributors[0]


def convert_role(
    outer_role: RoleId,
    cs: CorrelationSet,
    outer: RoleHierarchy,
    local: RoleHierarchy,
) -> ConversionResult:
    """Convert an outer role to the highest local role the correlations allow.

    With no candidates and a guest -> guest correlation configured, the
    local guest is the floor. With no candidates and no such correlation
    the result carries no local role and the request must be denied
    downstream. Ties among incomparable maximal candidates break to the
    lexicographically smallest role name.
    """
    candidates = candidate_roles(outer_role, cs, outer)
    via: Correlation | None = None
    if not candidates:
        default = cs.default_correlation(outer, local)
        if default is not None:
            candidates = frozenset({local.guest})
            via = default
    if not candidates:
        return ConversionResult(local_role=None, candidates=frozenset(), via=None)
    maxima = local.maximal(candidates)
    chosen = maxima[0]
    if via is None:
        via = _winning_correlation(outer_role, cs, chosen, outer)
    return ConversionResult(local_role=chosen, candidates=candidates, via=via)


def build_access_point_list(
    cs: CorrelationSet, outer: RoleHierarchy, local: RoleHierarchy
) -> dict[RoleId, frozenset[PermissionId]]:
    """Access points each outer role obtains locally: the effective
    permissions of its converted role, empty when conversion yields none."""
    table: dict[RoleId, frozenset[PermissionId]] = {}
    for outer_role in sorted(outer.roles):
        result = convert_role(outer_role, cs, outer, local)
        if result.local_role is None:
            table[outer_role] = frozenset()
        else:
            table[outer_role] = local.effective_permissions(result.local_role)
    return table
