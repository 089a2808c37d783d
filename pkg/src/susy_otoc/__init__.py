"""Out-of-time-order correlators for supersymmetric quantum mechanics in the tensor-product basis."""
from .basis import BasisMap, SusyState, build_basis, index_of, interior_cutoff, state_of
from .models import (GridSpec, ModelValidationError, SpectralModel, grid_model, load_model,
                     save_model, susy_ho_model)
from .operators import (OperatorContent, momentum_matrix_direct, momentum_matrix_from_energy,
                        phase_dress, position_matrix)
from .otoc import (ConvergenceWarning, OtocRequest, OtocResult, TruncationError, b_matrix,
                   commutator_matrix, microcanonical_otoc, microcanonical_sweep,
                   normalized_commutator_power_sign, partition_function, thermal_otoc)
from .oracle import build_ladders, oracle_operators, oracle_otoc

__version__ = "0.1.0"
