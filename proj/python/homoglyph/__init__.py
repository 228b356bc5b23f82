"""Homoglyph detection: rendering, Siamese embeddings and KD-tree search."""

import os as _os

# Wheels carry the font and tables next to the package.
_here = _os.path.join(_os.path.dirname(__file__), "data")
if _os.path.isdir(_here):
    _os.environ.setdefault("HOMOGLYPH_DATA_DIR", _here)

from ._core import (
    ConfusableTable,
    DegenerateLabels,
    EmptyIndex,
    EmptyString,
    HomoglyphError,
    KDForest,
    Model,
    NoSubstitutionPossible,
    StringTooLong,
    __version__,
    contrastive_loss,
    data_dir,
    distance,
    generate_spoof,
    levenshtein,
    linear_scan,
    render,
    roc_auc,
    synthesize_names,
    visual_edit_distance,
)

__all__ = [
    "ConfusableTable",
    "DegenerateLabels",
    "EmptyIndex",
    "EmptyString",
    "HomoglyphError",
    "KDForest",
    "Model",
    "NoSubstitutionPossible",
    "StringTooLong",
    "__version__",
    "contrastive_loss",
    "data_dir",
    "distance",
    "generate_spoof",
    "levenshtein",
    "linear_scan",
    "render",
    "roc_auc",
    "synthesize_names",
    "visual_edit_distance",
]
