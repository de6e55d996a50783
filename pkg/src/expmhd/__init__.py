"""Matrix-free exponential integrators and a resistive MHD benchmark."""

from .epirk import (EPIRK4, EPIRK5P1, EPIRK5P1_DECIMALS, EpiRKTableau,
                    StepController, StepStats, StiffnessFailure, epirk4_step,
                    epirk5p1_step, epirk_tableau_step, integrate_adaptive,
                    integrate_fixed)
from .fdjac import FdJacobianOperator
from .harness import (ConfigError, ExperimentConfig, ReferenceDisagreement,
                      error_norm, parse_config, read_records_csv,
                      reference_solution, run_experiment)
from .krylov import (KrylovConfig, KrylovConvergenceError, KrylovStats,
                     LinearOperator, PhiCombRequest, arnoldi, multi_scale_eval,
                     phi_comb)
from .mhd import (AdmissibilityError, BoundaryPolicy, Grid2D, MhdParams,
                  current_J, div_B, make_rhs, pressure)
from .phifuncs import phi_dense, phi_scalar
from .problems import (KhSpec, ReconnectionSpec, default_bc, kh_ic,
                       reconnection_ic)
from .snapshot import (SnapshotFormatError, read_snapshot, write_snapshot,
                       write_snapshot_csv)

__version__ = "0.1.0"

__all__ = [
    "EPIRK4", "EPIRK5P1", "EPIRK5P1_DECIMALS", "EpiRKTableau",
    "StepController", "StepStats", "StiffnessFailure", "epirk4_step",
    "epirk5p1_step", "epirk_tableau_step", "integrate_adaptive",
    "integrate_fixed", "FdJacobianOperator", "ConfigError",
    "ExperimentConfig", "ReferenceDisagreement", "error_norm",
    "parse_config", "read_records_csv", "reference_solution",
    "run_experiment", "KrylovConfig", "KrylovConvergenceError",
    "KrylovStats", "LinearOperator", "PhiCombRequest", "arnoldi",
    "multi_scale_eval", "phi_comb", "AdmissibilityError", "BoundaryPolicy",
    "Grid2D", "MhdParams", "current_J", "div_B", "make_rhs", "pressure",
    "phi_dense", "phi_scalar", "KhSpec", "ReconnectionSpec", "default_bc",
    "kh_ic", "reconnection_ic", "SnapshotFormatError", "read_snapshot",
    "write_snapshot", "write_snapshot_csv",
]
