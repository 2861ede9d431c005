"""Training-free purification of adversarially perturbed interaction sequences.

Collaborative signals retrieved from multi-hop item co-occurrence graphs are
used to find inserted items, delete or replace them, and vote over several
purified copies of a profile.
"""

__version__ = "0.1.0"

from .data import (  # noqa: E402
    EvaluationPair,
    InteractionDataset,
    ItemCatalog,
    build_catalog,
    holdout_last,
    parse_interactions,
)
from .denoise import PurifiedProfile, choose_replacement, purify_profile, select_targets  # noqa: E402
from .ensemble import EnsembleConfig, ReturnDefense, borda_vote, ensemble_recommend  # noqa: E402
from .graph import MultiHopGraph, build_graph, load_graph, save_graph  # noqa: E402
from .positioning import occurrence_profile, pair_score  # noqa: E402
from .recsys import ReferenceRecommender, RemoteRecommender, train_reference  # noqa: E402

__all__ = [
    "EnsembleConfig",
    "EvaluationPair",
    "InteractionDataset",
    "ItemCatalog",
    "MultiHopGraph",
    "PurifiedProfile",
    "ReferenceRecommender",
    "RemoteRecommender",
    "ReturnDefense",
    "borda_vote",
    "build_catalog",
    "build_graph",
    "choose_replacement",
    "ensemble_recommend",
    "holdout_last",
    "load_graph",
    "occurrence_profile",
    "pair_score",
    "parse_interactions",
    "purify_profile",
    "save_graph",
    "select_targets",
    "train_reference",
]
