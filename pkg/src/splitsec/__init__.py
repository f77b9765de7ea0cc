"""splitsec: split-manufacturing layout security workbench.

Parse gate-level `.bench` netlists, partition them with security-driven
techniques (balanced graph coloring, gate-type clustering), generate
fence-constrained placements, quantify proximity-induced information
leakage as mutual information, and evaluate resilience by mounting
proximity attacks on the FEOL-only view.
"""

from .netlist import (
    BenchParseError,
    Gate,
    NetlistGraph,
    NetlistStats,
    connected_pairs,
    graph_to_json,
    parse_bench,
    serialize_bench,
    stats,
)
from .protect import (
    Partition,
    Partitioning,
    g_color,
    g_color_traced,
    g_type,
    identity_partition,
    partitioning_to_json,
)
from .layout import (
    CapacityError,
    Fence,
    FencePlan,
    Placement,
    WirelengthReport,
    floorplan,
    hpwl,
    manhattan,
    place,
    placement_from_json,
    placement_to_json,
    shuffle,
)
from .leakage import (
    JointDistribution,
    LeakageReport,
    conditional_entropy,
    entropy,
    joint_distribution,
    mi_reduction_percent,
    mutual_information,
    mutual_information_reverse,
)
from .attack import (
    AttackResult,
    FeolView,
    assignment_attack,
    feol_view,
    greedy_proximity_attack,
    recovered_to_bench,
    score,
    wire_cost,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    derive_seed,
    mi_vs_attack_sweep,
    run_pipeline,
    table2_report,
)

__version__ = "0.1.0"
