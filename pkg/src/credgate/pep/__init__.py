"""Reverse proxy enforcing decisions in front of protected resources."""

from .routes import RouteConfigError, RouteRule, load_routes, match_route
from .service import PepConfig, create_pep_app

__all__ = [
    "PepConfig",
    "RouteConfigError",
    "RouteRule",
    "create_pep_app",
    "load_routes",
    "match_route",
]
