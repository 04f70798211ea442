"""credgate: decentralized IAM for cloud-to-edge deployments.

Credential-bound authentication (DIDs, signed credentials, request-bound
presentations) plus relationship-based authorization, enforced by a reverse
proxy in front of protected resources.
"""

__version__ = "0.1.0"
