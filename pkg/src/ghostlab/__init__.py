"""Finite-scale ghost projections over quotient-group expander families."""

__version__ = "0.1.0"

from .errors import GhostLabError  # noqa: E402
from .families import FamilySpec, alt_family, build_family, mixed_small_family, sl2_family  # noqa: E402
from .ghost import (  # noqa: E402
    build_T,
    classical_ghost,
    ghost_projection,
    make_window,
    rank_sequence,
    truncate_to_J,
    verify_claim1,
    verify_claim2,
    verify_claim3,
)
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "BACKEND",
    "FamilySpec",
    "GhostLabError",
    "alt_family",
    "build_T",
    "build_family",
    "classical_ghost",
    "ghost_projection",
    "make_window",
    "mixed_small_family",
    "rank_sequence",
    "sl2_family",
    "truncate_to_J",
    "verify_claim1",
    "verify_claim2",
    "verify_claim3",
]
