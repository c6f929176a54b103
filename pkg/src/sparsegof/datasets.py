"""Embedded example tables.

``tnfaip3``: TNFAIP3 diplotypes versus systemic sclerosis status (2 x 16,
n = 794, one empty cell).

``camargue``: trophic level versus presence of rare / polluto-tolerant /
exotic species in rivers of the Petite Camargue Alsacienne (3 x 8 as
collected, two empty columns, n = 21).
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .tables import ContingencyTable

_TNFAIP3_COLS = (
    "H1/H1", "H1/H2", "H1/H3", "H1/H4", "H1/H5", "H1/H6", "H2/H3", "H2/H5",
    "H2/H6", "H3/H3", "H3/H4", "H3/H5", "H3/H6", "H4/H5", "H5/H5", "H5/H6",
)  # fmt: skip
_TNFAIP3 = (
    (98, 7, 116, 2, 71, 3, 4, 2, 0, 34, 1, 42, 2, 1, 13, 1),
    (91, 9, 104, 3, 70, 12, 5, 4, 1, 30, 2, 40, 7, 1, 13, 5),
)

_CAMARGUE_COLS = ("(0,0,0)", "(1,0,0)", "(0,1,0)", "(0,0,1)", "(1,1,0)", "(0,1,1)", "(1,0,1)", "(1,1,1)")
_CAMARGUE = (
    (0, 0, 3, 0, 3, 2, 0, 0),
    (2, 1, 0, 2, 1, 0, 0, 0),
    (2, 0, 3, 1, 1, 0, 0, 0),
)

DATASETS = {
    "tnfaip3": {
        "description": "TNFAIP3 diplotypes vs systemic sclerosis (sound/affected)",
        "rows": ("Sound", "Affected"),
        "cols": _TNFAIP3_COLS,
        "counts": _TNFAIP3,
        "csv": "tnfaip3.csv",
    },
    "camargue": {
        "description": "River trophic level vs (rare, polluto-tolerant, exotic) species presence",
        "rows": ("Oligotrophic", "Mesotrophic", "Eutrophic"),
        "cols": _CAMARGUE_COLS,
        "counts": _CAMARGUE,
        "csv": "camargue.csv",
    },
}


def dataset_names() -> list[str]:
    return sorted(DATASETS)


def load(name: str) -> ContingencyTable:
    try:
        spec = DATASETS[name]
    except KeyError:
        raise KeyError(f"unknown dataset {name!r}; available: {', '.join(dataset_names())}") from None
    return ContingencyTable(np.array(spec["counts"]), spec["rows"], spec["cols"])


def csv_path(name: str):
    """Path of the CSV copy of an embedded dataset shipped with the package."""
    return resources.files("sparsegof") / "data" / DATASETS[name]["csv"]
