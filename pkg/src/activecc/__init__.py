"""Active correlation clustering with noisy pairwise-similarity oracles."""

from .core import (Clustering, ObjectSet, PairError, SimilarityStore,
                   ValueRangeError, cost_delta, cost_r, violation)
from .clusterer import LocalSearchConfig, cluster
from .meanfield import (MeanFieldState, factorial_entropy, mean_field,
                        mean_field_conditioned, prob_same_cluster)
from .acquisition import (AcquisitionScores, STRATEGY_NAMES, acq_entropy,
                          acq_imu, acq_imu_c, acq_information_gain,
                          acq_maxexp, acq_maxmin, acq_uniform, select_batch)
from .oracle import (GroundTruth, NoiseModel, gen_synthetic,
                     init_from_clustering, init_random_subset, load_csv,
                     lloyd_kmeans, oracle_answer)
from .engine import (DatasetSpec, RunConfig, RunRecord, run_active_loop,
                     run_suite)
from .metrics import ami, ari, brute_gibbs, brute_min_cost

__version__ = "0.1.0"

__all__ = [
    "AcquisitionScores", "Clustering", "DatasetSpec", "GroundTruth",
    "LocalSearchConfig", "MeanFieldState", "NoiseModel", "ObjectSet",
    "PairError", "RunConfig", "RunRecord", "STRATEGY_NAMES",
    "SimilarityStore", "ValueRangeError", "acq_entropy", "acq_imu",
    "acq_imu_c", "acq_information_gain", "acq_maxexp", "acq_maxmin",
    "acq_uniform", "ami", "ari", "brute_gibbs", "brute_min_cost", "cluster",
    "cost_delta", "cost_r", "factorial_entropy", "gen_synthetic",
    "init_from_clustering", "init_random_subset", "load_csv", "lloyd_kmeans",
    "mean_field", "mean_field_conditioned", "oracle_answer",
    "prob_same_cluster", "run_active_loop", "run_suite", "select_batch",
    "violation",
]
