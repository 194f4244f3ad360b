"""Map concurrent experiment requests onto a shared wireless testbed.

Stage one enumerates induced-subgraph placements of each requested topology;
stage two picks a conflict-free, priority-weighted subset with a genetic
algorithm. An exhaustive search serves as the optimality reference.
"""

from .brute_force import SearchSpaceTooLarge, brute_force_optimum
from .conflicts import ConflictReport, ResourceClaim, assign_channels, claims_of, count_conflicts
from .ga import (
    Chromosome,
    FitnessBreakdown,
    GAConfig,
    Gene,
    MapperSolution,
    evaluate_fitness,
    ga_step,
    initialize_population,
    run_mapper,
)
from .harness import MetricsReport, Scenario, emit_results, run_scenario
from .isomorphism import PlacementMapping, brute_force_induced_mappings, enumerate_induced_mappings
from .request import ChannelDemand, GeneratorParams, NodeKind, Request, generate_requests, validate_request
from .topology import InterfaceType, TestbedTopology, build_grid, build_random, load_topology

__version__ = "0.1.0"
