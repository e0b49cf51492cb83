"""MOSCITO: temporal subspace clustering for molecular-dynamics-style data.

Pipeline: featurize a trajectory, learn a nonnegative dictionary and coding
matrix with temporal regularization, cluster the cosine-affinity graph of
the codes, and evaluate the resulting discrete states as a Markov state
model via VAMP scores. Baselines (PCA/TICA + k-means, SSC) and a synthetic
generator with planted states round out the toolkit.
"""

from .bench import SynthSpec, ari, segment_count, synth_trajectory
from .dictlearn import AdmmState, FitDiagnostics, SolverConfig, fit, objective
from .errors import (
    ConvergenceError,
    FeaturizerError,
    MoscitoError,
    ParseError,
    ValidationError,
)
from .features import FeatureMatrix, assemble_features, center_and_align, dihedral
from .graphclust import (
    AffinityGraph,
    DiscreteTrajectory,
    affinity,
    spectral_clustering,
)
from .msm import TransitionModel, VampComputation, koopman_matrix, transition_matrix, vamp_r
from .tempreg import (
    TemporalLaplacian,
    TemporalWeightConfig,
    regularizer_value,
    temporal_laplacian,
    weight_matrix,
)
from .trajio import Topology, Trajectory, load_topology, load_trajectory, write_trajectory

__version__ = "0.1.0"

__all__ = [
    "AdmmState",
    "AffinityGraph",
    "ConvergenceError",
    "DiscreteTrajectory",
    "FeatureMatrix",
    "FeaturizerError",
    "FitDiagnostics",
    "MoscitoError",
    "ParseError",
    "SolverConfig",
    "SynthSpec",
    "TemporalLaplacian",
    "TemporalWeightConfig",
    "Topology",
    "Trajectory",
    "TransitionModel",
    "ValidationError",
    "VampComputation",
    "affinity",
    "ari",
    "assemble_features",
    "center_and_align",
    "dihedral",
    "fit",
    "koopman_matrix",
    "load_topology",
    "load_trajectory",
    "objective",
    "regularizer_value",
    "segment_count",
    "spectral_clustering",
    "synth_trajectory",
    "temporal_laplacian",
    "transition_matrix",
    "vamp_r",
    "weight_matrix",
    "write_trajectory",
]
