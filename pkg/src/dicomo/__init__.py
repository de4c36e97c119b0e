"""Directed configuration model laboratory.

Random digraph generation from bi-degree sequences, exact distances and
diameters, branching-process Monte Carlo, and the closed-form limiting
constants the measurements are compared against.
"""

from .degmodel import (
    BiDegreeSequence,
    JointDegreeDistribution,
    SequenceStats,
    sample_sequence,
    stats,
    subset_degree_sums,
    validate_sequence,
)
from .errors import DicomoError
from .graphalg import (
    DistanceReport,
    NeighborhoodProfile,
    bfs_distances,
    count_simple_paths,
    diameter_exact,
    expected_path_bound,
    neighborhood_profile,
    thin_depth_scan,
    typical_distance_sample,
)
from .graphgen import (
    Digraph,
    ExplorationState,
    binomial_digraph,
    d_out_model,
    digraph_from_pairing,
    lazy_explore,
    pair_uniform,
    replay_explore,
    sample_simple,
)
from .gwsim import (
    GWTrajectory,
    estimate_survival,
    simulate,
    subcritical_decay,
    thin_event_probability,
)
from .harness import ExperimentConfig, ResultRecord, run
from .theory import (
    OffspringDistribution,
    TheoryConstants,
    conjugate,
    poisson_conjugate_mean,
    survival_probability,
    theory_constants,
)

__version__ = "0.1.0"
