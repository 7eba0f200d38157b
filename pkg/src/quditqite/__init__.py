"""Qudit product-state imaginary-time evolution for capacity-constrained Min-d-Cut."""
from ._accel import HAVE_NUMBA, backend_name
from .expectation import (
    HamiltonianSpec,
    MarginalTable,
    commutator_expectation,
    expected_energy,
    generator_second_moment,
    gradient_table,
    marginals,
)
from .problem import (
    MinDCutInstance,
    PenaltyConfig,
    WeightedGraph,
    classical_cut_cost,
    generate_instance,
    is_feasible,
    load_instance,
    penalty_cost,
    save_instance,
    total_cost,
)
from .qubo import export_qubo
from .qudit import (
    PoolOperator,
    ProductState,
    apply_generator_rotation,
    build_pool,
    init_uniform_state,
    round_state,
)
from .solver import RunRecord, SolverConfig, compute_coefficient, select_generators, solve, step

__version__ = "0.1.0"
