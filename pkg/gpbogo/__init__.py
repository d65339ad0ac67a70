__version__ = "0.1.0"

from .cascade import Cascade, overlap_diagnostic
from .data import load_potential, save_potential
from .potential import RadialPotential, smooth_bump, square_well, tabulated
from .scattering import solve_neumann, solve_zero_energy
