"""Policy administration and decision service with embedded presentation
validation."""

from .service import AuthzConfig, create_authz_app, reason_for_exception
from .verifier import PipConfig, PresentationValidator

__all__ = [
    "AuthzConfig",
    "PipConfig",
    "PresentationValidator",
    "create_authz_app",
    "reason_for_exception",
]
