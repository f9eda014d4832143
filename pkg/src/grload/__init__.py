"""Approximate Grover-Rudolph state preparation.

Load a smooth real function into the amplitudes of an ``n``-qubit state
with far fewer two-qubit gates than the exact construction, by sharing one
rotation angle across the later, nearly uniform blocks.
"""

from .angles import AngleBlock, ClusterAnnotation, block_angles, continuous_theta, gr_blocks
from .circuits import (
    Gate,
    GateCountReport,
    GateList,
    count_tqg,
    decompose_mcr,
    emit_ir,
    mcr_tqg,
    parse_ir,
    plan_to_gates,
)
from .errors import (
    BoundViolation,
    DegenerateFunction,
    DimensionError,
    DivergenceError,
    DomainError,
    EtaTooLarge,
    GrloadError,
    SingularityError,
    UnsupportedSingularity,
    ZeroMassInterval,
)
from .functions import FunctionSpec, discretize, eta_bound, registry_spec, standardize
from .planner import (
    CircuitPlan,
    compute_k0,
    k0_asymptotic,
    plan_exact,
    plan_singular,
    plan_theorem1,
)
from .simulator import StateVector, apply_ucr, fidelity, run_plan
from .variational import (
    AnsatzSpec,
    TrainConfig,
    TrainReport,
    build_ansatz,
    gradient,
    init_params,
    instantiate,
    loss,
    train,
)

__version__ = "0.1.0"
