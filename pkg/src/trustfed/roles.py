"""Per-domain role hierarchies: directed acyclic seniority graphs with
permission inheritance.

Edges run parent -> child (senior -> junior). The derived relation
"a is at-or-above b" is the reflexive-transitive closure of the edges and
forms a partial order when the graph is acyclic. Seniors inherit the
permissions of everything below them. Each hierarchy designates a guest
role that must be minimal (no children).

Hierarchies are immutable after construction; ``add_role`` and
``with_guest`` return new values. Construction does not validate, so a
defective graph can be built and inspected; ``validate`` reports one
violation per defect.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DuplicateRole, UnknownParent, UnknownRole


@dataclass(frozen=True, order=True)
class RoleId:
    """Role identity, unique as (domain, name)."""

    domain: str
    name: str

    def __post_init__(self) -> None:
        if not self.domain or not self.name:
            raise ValueError("role domain and name must be non-empty")

    def __str__(self) -> str:
        return f"{self.domain}:{self.name}"


@dataclass(frozen=True, order=True)
class PermissionId:
    """A named access point on a resource."""

    name: str
    resource: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("permission name must be non-empty")

    def __str__(self) -> str:
        return f"{self.name}@{self.resource}"


@dataclass(frozen=True)
class Violation:
    """One structural defect found by hierarchy validation."""

    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class RoleHierarchy:
    """Immutable seniority DAG over one domain's roles."""

    def __init__(
        self,
        domain: str,
        roles: frozenset[RoleId] = frozenset(),
        edges: frozenset[tuple[RoleId, RoleId]] = frozenset(),
        permissions: dict[RoleId, frozenset[PermissionId]] | None = None,
        guest: RoleId | None = None,
    ):
        self.domain = domain
        self.roles = frozenset(roles)
        self.edges = frozenset(edges)
        self.permissions = {r: frozenset(p) for r, p in (permissions or {}).items()}
        self.guest = guest
        self._children: dict[RoleId, frozenset[RoleId]] = {}
        children: dict[RoleId, set[RoleId]] = {r: set() for r in self.roles}
        for parent, child in self.edges:
            children.setdefault(parent, set()).add(child)
        self._children = {r: frozenset(c) for r, c in children.items()}

    @classmethod
    def empty(cls, domain: str) -> "RoleHierarchy":
        return cls(domain=domain)

    # --- construction ---

    def add_role(
        self,
        role: RoleId,
        parents: frozenset[RoleId] | tuple[RoleId, ...] = (),
        permissions: frozenset[PermissionId] | tuple[PermissionId, ...] = (),
    ) -> "RoleHierarchy":
        """Return a new hierarchy with the role added under the given parents.

        New roles only ever gain incoming edges, so acyclicity is preserved
        by construction.
        """
        if role in self.roles:
            raise DuplicateRole(f"{role} is already in the hierarchy")
        for parent in parents:
            if parent not in self.roles:
                raise UnknownParent(f"parent {parent} is not in the hierarchy")
        new_perms = dict(self.permissions)
        new_perms[role] = frozenset(permissions)
        return RoleHierarchy(
            domain=self.domain,
            roles=self.roles | {role},
            edges=self.edges | {(p, role) for p in parents},
            permissions=new_perms,
            guest=self.guest,
        )

    def with_guest(self, role: RoleId) -> "RoleHierarchy":
        """Return a new hierarchy with the designated guest role."""
        if role not in self.roles:
            raise UnknownRole(f"{role} is not in the hierarchy")
        return RoleHierarchy(
            domain=self.domain,
            roles=self.roles,
            edges=self.edges,
            permissions=self.permissions,
            guest=role,
        )

    # --- queries ---

    def _require(self, role: RoleId) -> None:
        if role not in self.roles:
            raise UnknownRole(f"{role} is not in the hierarchy of {self.domain}")

    def children_of(self, role: RoleId) -> frozenset[RoleId]:
        self._require(role)
        return self._children.get(role, frozenset())

    def descendants(self, role: RoleId) -> frozenset[RoleId]:
        """All roles at or below the given role (reflexive closure)."""
        self._require(role)
        seen: set[RoleId] = set()
        stack = [role]
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self._children.get(current, ()))
        return frozenset(seen)

    def is_ancestor(self, a: RoleId, b: RoleId) -> bool:
        """True iff a is at-or-above b; reflexive, so is_ancestor(x, x) holds."""
        self._require(a)
        self._require(b)
        return b in self.descendants(a)

    def strictly_above(self, a: RoleId, b: RoleId) -> bool:
        return a != b and self.is_ancestor(a, b)

    def effective_permissions(self, role: RoleId) -> frozenset[PermissionId]:
        """Own permissions plus everything inherited from roles below."""
        self._require(role)
        acquired: set[PermissionId] = set()
        for member in self.descendants(role):
            acquired |= self.permissions.get(member, frozenset())
        return frozenset(acquired)

    def maximal(self, candidates: frozenset[RoleId] | set[RoleId]) -> list[RoleId]:
        """Candidates with no other candidate strictly above them, sorted by name."""
        result = [
            c
            for c in candidates
            if not any(other != c and self.is_ancestor(other, c) for other in candidates)
        ]
        return sorted(result, key=lambda r: r.name)

    # --- validation ---

    def validate(self) -> list[Violation]:
        """Structural check: one violation per defect, empty when sound."""
        violations: list[Violation] = []
        for role in sorted(self.roles):
            if role.domain != self.domain:
                violations.append(
                    Violation("wrong-domain", f"{role} does not belong to {self.domain}")
                )
        for parent, child in sorted(self.edges):
            if parent not in self.roles or child not in self.roles:
                violations.append(
                    Violation("unknown-edge-endpoint", f"edge {parent} -> {child}")
                )
        for role in sorted(self.permissions):
            if role not in self.roles:
                violations.append(
                    Violation("unknown-permission-role", f"permissions listed for {role}")
                )
        for cycle in self._cycles():
            violations.append(
                Violation("cycle", " -> ".join(str(r) for r in cycle))
            )
        if self.guest is not None:
            if self.guest not in self.roles:
                violations.append(
                    Violation("guest-not-member", f"guest {self.guest} is not a member role")
                )
            elif self._children.get(self.guest):
                violations.append(
                    Violation("guest-not-minimal", f"guest {self.guest} has children")
                )
        elif self.roles:
            violations.append(
                Violation("guest-missing", f"no guest role designated for {self.domain}")
            )
        return violations

    def _cycles(self) -> list[list[RoleId]]:
        """Strongly connected components with more than one node, plus
        self-loops; each is one cycle defect."""
        index: dict[RoleId, int] = {}
        lowlink: dict[RoleId, int] = {}
        on_stack: set[RoleId] = set()
        stack: list[RoleId] = []
        counter = [0]
        components: list[list[RoleId]] = []

        adjacency = {r: sorted(self._children.get(r, ())) for r in self.roles}

        def strongconnect(node: RoleId) -> None:
            index[node] = lowlink[node] = counter[0]
            counter[0] += 1
            stack.append(node)
            on_stack.add(node)
            for succ in adjacency.get(node, ()):
                if succ not in self.roles:
                    continue
                if succ not in index:
                    strongconnect(succ)
                    lowlink[node] = min(lowlink[node], lowlink[succ])
                elif succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if lowlink[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or (node, node) in self.edges:
                    components.append(sorted(component))

        for role in sorted(self.roles):
            if role not in index:
                strongconnect(role)
        return components
