"""Numerical laboratory for graph attention on the contextual stochastic block model."""

from .attention import (
    AttentionField,
    GatHeadParams,
    MlpPsiParams,
    attention_convolution,
    attention_field,
    gat_ansatz_heads,
    mlp_attention_score,
    simple_graph_convolution,
)
from .classifiers import (
    ConvergenceError,
    bayes_edge_classify,
    bayes_node_classify,
    spectral_node_classify,
)
from .csbm import CsbmParams, CsbmSample, check_high_prob_events, sample_csbm
from .experiments import (
    ConfigError,
    SweepConfig,
    SweepRecord,
    run_vary_distance_sweep,
    run_vary_q_sweep,
    run_verification_suite,
)
from .numerics import RngStream, std_normal_cdf

__version__ = "0.1.0"
