"""Simulator for stable matching on stochastically evolving preference lists."""

from evomatch.model import (
    Matching,
    Permutation,
    PreferenceProfile,
    Side,
    UNMATCHED,
    adversarial_profile,
    blocking_pairs,
    element_disagreements,
    is_stable,
    kendall_tau,
    random_profile,
)

__version__ = "0.1.0"

__all__ = [
    "Matching",
    "Permutation",
    "PreferenceProfile",
    "Side",
    "UNMATCHED",
    "adversarial_profile",
    "blocking_pairs",
    "element_disagreements",
    "is_stable",
    "kendall_tau",
    "random_profile",
    "__version__",
]
