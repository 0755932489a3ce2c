"""Exception types shared across the package.

Class names follow the contract vocabulary of the operations that raise
them; all inherit from TrustFedError so callers can catch broadly.
"""


class TrustFedError(Exception):
    """Base class for all trustfed errors."""


# --- trust ledger ---

class UnknownEntity(TrustFedError):
    """Entity is not registered where the operation requires it."""


class SelfRating(TrustFedError):
    """An entity tried to rate itself."""


class RatingOutOfRange(TrustFedError):
    """Experience rating outside the strict open interval (-1, 1)."""


# --- cross-domain trust ---

class MixedDomains(TrustFedError):
    """Foreign entity set spans more than one home domain."""


class AllWeightsZero(TrustFedError):
    """Every entity weight over the contributing set is zero."""


# --- role model / conversion ---

class DuplicateRole(TrustFedError):
    """Role already present in the hierarchy."""


class UnknownParent(TrustFedError):
    """Referenced parent role is not in the hierarchy."""


class UnknownRole(TrustFedError):
    """Role is not a member of the hierarchy (or domain) in question."""


# --- policy engine ---

class BadSecret(TrustFedError):
    """Authentication secret does not match the stored one."""


class NotAuthenticated(TrustFedError):
    """Requester has no live authentication token."""


class RoleNotGranted(TrustFedError):
    """Requester was never granted the role it is acting under."""


class NoPriorInteraction(TrustFedError):
    """Feedback submitted without a permitted interaction this epoch."""


class NotPermitted(TrustFedError):
    """Certificate requested without a backing permit decision."""


# --- federation ---

class DuplicateDomain(TrustFedError):
    """Domain is already registered with the federation."""


class UnknownDomain(TrustFedError):
    """Domain is not registered with the federation."""


class RoleNotHeld(TrustFedError):
    """Cross-domain requester does not hold the outer role at home."""


class UnknownRequest(TrustFedError):
    """No pending cross-domain transaction with that request id."""


# --- simulator ---

class InvalidScenario(TrustFedError):
    """Scenario failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))
