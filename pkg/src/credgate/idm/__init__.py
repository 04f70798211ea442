"""Organization-side identity manager: DID registry, issuance, revocation."""

from .service import IdmConfig, create_idm_app
from .state import IdmState

__all__ = ["IdmConfig", "IdmState", "create_idm_app"]
