"""Contact Hamiltonian mechanics: continuous flows, discrete Herglotz and
discrete contact Hamiltonian integrators, and discrete Hamilton-Jacobi checks."""
from .core import (ContactState, ContinuousHamiltonianModel, ContinuousLagrangianModel,
                   DiscreteHamiltonianModel, DiscreteLagrangianModel, Tangent,
                   VelocityState, contact_form_pairing, reeb_field)
from .errors import (CausticError, ContactError, DegenerateStep, DimensionError,
                     DomainError, NewtonDiverged, NonFiniteError, RegularityViolated,
                     StepError)

__all__ = [
    "ContactState", "ContinuousHamiltonianModel", "ContinuousLagrangianModel",
    "DiscreteHamiltonianModel", "DiscreteLagrangianModel", "Tangent", "VelocityState",
    "contact_form_pairing", "reeb_field", "CausticError", "ContactError", "DegenerateStep",
    "DimensionError", "DomainError", "NewtonDiverged", "NonFiniteError",
    "RegularityViolated", "StepError",
]
__version__ = "0.1.0"
