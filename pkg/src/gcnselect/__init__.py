"""Transductive two-layer GCN and centrality-based label selection."""

from .centrality import CentralityScores, bfs_distances, local_reaching_centrality
from .data_io import DatasetBundle, generate_sbm, load_dataset, row_normalize_features, save_dataset
from .gcn import ModelParams, forward, init_params, loss_and_grads
from .graph import (
    Graph,
    SparseMatrix,
    build_graph,
    connected_components,
    normalized_adjacency,
    normalized_laplacian,
    spmm,
)
from .selection import Policy, Split, budget_for_rate, make_split, select_train_nodes
from .spectral import SpectrumResult, SpectrumStats, eigenvalues_symmetric, spectrum_stats
from .trainer import TrainConfig, TrainResult, evaluate, train

__version__ = "0.1.0"
