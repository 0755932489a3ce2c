"""Behavioral-trust RBAC across security domains.

Single-domain trust metrics gate role-based authorization; a federation
coordinator converts roles between domains through correlation policies
and keeps a directed domain-pair trust matrix up to date from both sides'
post-interaction feedback. A deterministic simulator drives the whole
stack from declarative scenario files.
"""

from .conversion import (
    Correlation,
    CorrelationKind,
    CorrelationSet,
    ConversionResult,
    PolicyClass,
    build_access_point_list,
    candidate_roles,
    classify_policy,
    convert_role,
)
from .crossdomain import (
    CrossParams,
    DomainPairTrust,
    combined_trust,
    compute_cross_dtd,
    compute_cross_rp,
    compute_cross_td,
)
from .engine import (
    AccessRequest,
    Certificate,
    Credential,
    Decision,
    DenyReason,
    DomainAuthority,
    Outcome,
    PipelineTrace,
    PolicyDatabase,
)
from .federation import (
    CrossDomainRequest,
    Federation,
    FederationState,
    ProtocolTrace,
    STEP_LABELS,
)
from .roles import PermissionId, RoleHierarchy, RoleId, Violation
from .scenario import (
    BehaviorProfile,
    Scenario,
    load_scenario,
    parse_scenario,
    validate_scenario,
)
from .simulator import SimulationResult, TraceEvent, build_world, run
from .trust import (
    DomainTrustView,
    EntityId,
    PairwiseTrust,
    TrustLedger,
    TrustParams,
    dtd_update,
    qos_update,
    trust_degree,
)

__all__ = [
    "AccessRequest",
    "BehaviorProfile",
    "Certificate",
    "Correlation",
    "CorrelationKind",
    "CorrelationSet",
    "ConversionResult",
    "Credential",
    "CrossDomainRequest",
    "CrossParams",
    "Decision",
    "DenyReason",
    "DomainAuthority",
    "DomainPairTrust",
    "DomainTrustView",
    "EntityId",
    "Federation",
    "FederationState",
    "Outcome",
    "PairwiseTrust",
    "PermissionId",
    "PipelineTrace",
    "PolicyClass",
    "PolicyDatabase",
    "ProtocolTrace",
    "RoleHierarchy",
    "RoleId",
    "Scenario",
    "SimulationResult",
    "STEP_LABELS",
    "TraceEvent",
    "TrustLedger",
    "TrustParams",
    "Violation",
    "build_access_point_list",
    "build_world",
    "candidate_roles",
    "classify_policy",
    "combined_trust",
    "compute_cross_dtd",
    "compute_cross_rp",
    "compute_cross_td",
    "convert_role",
    "dtd_update",
    "load_scenario",
    "parse_scenario",
    "qos_update",
    "run",
    "trust_degree",
    "validate_scenario",
]

__version__ = "0.1.0"
