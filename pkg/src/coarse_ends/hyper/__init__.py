"""Symbolic points, parametric spaces and certificate checking."""
from .certificates import (
    ChainSchema,
    GapCertificate,
    Segment,
    evaluate_schema,
    transport_point,
    transport_schema,
    verify_chain_schema,
    verify_gap_certificate,
)
from .descriptors import builtin_certificates, builtin_space, load_certificates, load_space
from .iota import IotaReport, iota_report
from .poly import BiPoly, Poly, parse_bipoly, parse_poly, poly_is_bounded
from .space import ParametricSpace, Piece, SymbolicPoint, finitely_close, is_infinite, membership_check

__all__ = [
    "ChainSchema", "GapCertificate", "Segment", "evaluate_schema", "transport_point",
    "transport_schema", "verify_chain_schema", "verify_gap_certificate",
    "builtin_certificates", "builtin_space", "load_certificates", "load_space",
    "IotaReport", "iota_report",
    "BiPoly", "Poly", "parse_bipoly", "parse_poly", "poly_is_bounded",
    "ParametricSpace", "Piece", "SymbolicPoint", "finitely_close", "is_infinite", "membership_check",
]
