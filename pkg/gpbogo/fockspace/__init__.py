from gpbogo.fockspace.basis import (
    ExcitationBasis,
    FockBasis,
    ModeSet,
    build_basis,
    build_excitation_basis,
)
from gpbogo.fockspace.operators import (
    SparseOperator,
    build_hamiltonian,
    condensate_energy,
    conjugate_by_map,
    excitation_hamiltonian_parts,
    excitation_map,
    excitation_number,
    operator,
    total_number,
)
from gpbogo.fockspace.spectral import conjugate, ground_state, overlap, spectrum
from gpbogo.fockspace.transforms import (
    DRESSED,
    PLAIN,
    UnitaryExponential,
    bogoliubov_residual,
    build_cubic_generator,
    build_generalized_bogoliubov,
    eta_array,
    exponential,
    number_growth,
)
