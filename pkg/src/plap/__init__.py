"""Graph and hypergraph p-Laplacian solvers for semi-supervised learning on point clouds."""
from .errors import (
    DegenerateError,
    DisconnectedError,
    DomainError,
    KernelError,
    PlapError,
    QuadratureError,
    SamplingError,
)
from .geometry import (
    DensityModel,
    Domain,
    LabelSet,
    PointCloud,
    build_index,
    cloud_with_labels,
    delta_n,
    epsilon_schedule,
    radius_neighbors,
    radius_neighbors_all,
    sample_cloud,
)
from .kernels import Kernel, KernelMoments, eta_chi, k_of_p, moments, p_of_k
from .operators import (
    HypergraphStencil,
    WeightedGraph,
    build_graph,
    build_stencil,
    game_residual,
    graph_inf_residual,
    graph_p_residual,
    hyper_operator,
    hyper_residual,
)
from .solvers import (
    SolveReport,
    SolverConfig,
    check_connected,
    solve_game,
    solve_graph_inf,
    solve_graph_p,
    solve_hypergraph,
    verify_comparison,
)

__version__ = "0.1.0"
