"""Parametric model reduction for shear frames with Bouc-Wen hysteresis.

High-fidelity N-story shear chains with hysteretic inter-story links are
reduced by Galerkin projection onto POD bases. Parametric queries are served
by four basis strategies (one global basis, per-subdomain pooled bases, and
interpolation of either tangent-space entries or their coefficients on a
shared region basis), optionally accelerated further with ECSW
hyper-reduction. The experiment layer persists every offline artifact under
content hashes and evaluates reduced models against fresh full-order runs.
"""

from .config import ExperimentConfig, from_dict as config_from_dict, from_file as config_from_file
from .ecsw import (
    EcswTraining,
    HyperMesh,
    assemble_training,
    element_projection_rows,
    hyper_force,
    solve_sparse_nnls,
)
from .errors import (
    BasisMismatchError,
    BasisRankError,
    ConfigError,
    GrassmannConditionError,
    MissingArtifactError,
    NewtonConvergenceError,
    OutOfDomainError,
    PromdynError,
)
from .excitation import (
    LoadHistory,
    QuakeParams,
    derive_seed,
    filtered_noise_quake,
    sinusoid,
)
from .experiment import Experiment, parse_points, report, run_offline, run_online, verify
from .grassmann import TangentVector, exp_map, log_map, principal_angles
from .metrics import ComparisonReport, aggregate, relative_error, speedup
from .model import (
    BoucWenLink,
    StructuralModel,
    build_shear_frame,
    restoring_force,
    tangent_stiffness,
    update_link_states,
)
from .newmark import FullOrderSystem, IntegratorConfig, ResponseHistory, integrate, integrate_reduced
from .params import (
    ParameterAxis,
    ParameterGrid,
    Subdomain,
    interpolation_weights,
    locate,
    partition_grid,
)
from .pod import (
    BasisProvenance,
    OrderSelection,
    ReductionBasis,
    SnapshotSet,
    choose_order,
    local_basis,
    order_for_energy,
    pooled_basis,
    stack_and_compress,
)
from .rom import (
    GlobalModel,
    ReducedSystem,
    RegionModel,
    Variant,
    build_global,
    build_region,
    interpolate_basis,
    query,
    query_coefficients,
    query_entries,
    query_local,
    reduce_model,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
