"""Topological comparison of dimension-reduction methods on delay-embedded time series.

Submodules
----------
ingest       EEG segments and channel matrices
embedding    Takens delay embedding and false nearest neighbours
dimreduce    Isomap, kernel ridge, FastICA, Laplacian eigenmaps, t-SNE
complexes    Vietoris-Rips filtrations and a Čech oracle
persistence  F2 boundary reduction, diagrams, Betti numbers
metrics      bottleneck and Wasserstein distances
stats        landscapes, permutation and rank-sum tests
pipeline     the end-to-end workflow and its manifest
"""

from ._version import __version__
from ._validation import ComputeError, ValidationError
from .complexes import FilteredComplex, rips_filtration
from .embedding import DelayParams, takens_embed
from .metrics import bottleneck_distance, wasserstein_distance
from .persistence import PersistenceDiagram, betti_at, persistence_diagram

__all__ = [
    "__version__", "ValidationError", "ComputeError", "FilteredComplex", "rips_filtration",
    "DelayParams", "takens_embed", "bottleneck_distance", "wasserstein_distance",
    "PersistenceDiagram", "persistence_diagram", "betti_at",
]
