"""Jordan constants and Chermak-Delgado data for finite permutation groups."""

from .perm import (
    Homomorphism,
    PermGroup,
    Permutation,
    center,
    centralizer,
    compose,
    derived_subgroup,
    direct_product,
    group_from_generators,
    normal_closure,
    quotient,
    semidirect_product,
    swap_extension,
)

__all__ = [
    "Homomorphism",
    "PermGroup",
    "Permutation",
    "center",
    "centralizer",
    "compose",
    "derived_subgroup",
    "direct_product",
    "group_from_generators",
    "normal_closure",
    "quotient",
    "semidirect_product",
    "swap_extension",
]

__version__ = "0.1.0"
