"""Weighted (Kondratiev) Sobolev spaces on model polyhedral domains.

Exact decision rules for embeddings and products, plus numerical norms on
dyadic shells used to check those rules against concrete functions.
"""

from .calculus import (
    INF,
    DomainKind,
    DomainSpec,
    Outcome,
    ProductResult,
    SpaceParams,
    Verdict,
    embed_compact,
    embed_continuous,
    is_algebra,
    member_constant,
    member_rho_power,
    power_target,
    product_target,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "DomainKind",
    "DomainSpec",
    "Outcome",
    "ProductResult",
    "SpaceParams",
    "Verdict",
    "embed_compact",
    "embed_continuous",
    "is_algebra",
    "member_constant",
    "member_rho_power",
    "power_target",
    "product_target",
]
