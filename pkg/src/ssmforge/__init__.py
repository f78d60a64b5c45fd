"""Construction, repair, verification, and decoding of combinatorial designs
for nonadaptive group testing, plus exact rate-bound arithmetic."""

__version__ = "0.1.0"

from .alteration import (
    ConstructionReport,
    ConstructionTask,
    TargetProperty,
    construct,
    repair_step,
)
from .bitmatrix import (
    MAGIC,
    BinaryMatrix,
    BitVector,
    OutcomeVector,
    covers,
    matrix_from_column_strings,
    matrix_from_strings,
    random_matrix,
    read_matrix,
    write_matrix,
)
from .bounds import (
    RateBound,
    f_shearer,
    feasibility,
    g_cubic_t3,
    g_general,
    optimize_over_b,
    optimize_p,
    published_table,
    rate,
    surjections,
)
from .decoder import decode_disjunct, decode_ssm, simulate_outcome
from .errors import (
    InconsistentOutcomeError,
    RepairLimitError,
    SizeGuardError,
    StaleWitnessError,
    UsageError,
)
from .generators import (
    FamilySpec,
    enumerate_family,
    expected_sample_size,
    family_size,
    sample_family,
    uniform_member,
)
from .verifiers import (
    Verdict,
    is_bar_t_separable,
    is_k_locally_2_thin,
    is_locally_thin,
    is_strongly_t_separable,
    is_strongly_t_separable_naive,
    is_t_cancellative,
    is_t_disjunct,
    is_t_separable,
    replay_witness,
    verify_property,
)

__all__ = [
    "__version__",
    "MAGIC",
    "BinaryMatrix",
    "BitVector",
    "ConstructionReport",
    "ConstructionTask",
    "FamilySpec",
    "InconsistentOutcomeError",
    "OutcomeVector",
    "RateBound",
    "RepairLimitError",
    "SizeGuardError",
    "StaleWitnessError",
    "TargetProperty",
    "UsageError",
    "Verdict",
    "construct",
    "covers",
    "decode_disjunct",
    "decode_ssm",
    "enumerate_family",
    "expected_sample_size",
    "f_shearer",
    "family_size",
    "feasibility",
    "g_cubic_t3",
    "g_general",
    "is_bar_t_separable",
    "is_k_locally_2_thin",
    "is_locally_thin",
    "is_strongly_t_separable",
    "is_strongly_t_separable_naive",
    "is_t_cancellative",
    "is_t_disjunct",
    "is_t_separable",
    "matrix_from_column_strings",
    "matrix_from_strings",
    "optimize_over_b",
    "optimize_p",
    "published_table",
    "random_matrix",
    "rate",
    "read_matrix",
    "repair_step",
    "replay_witness",
    "sample_family",
    "simulate_outcome",
    "surjections",
    "uniform_member",
    "verify_property",
    "write_matrix",
]
