"""Discrete quantum Boltzmann kinetics on lattice rays.

Collision operators for condensation (1<->2), exchange (2<->2) and merging
(1<->3) processes on a 1D ray of modes, with reaction-network compilation,
equilibrium solvers, Lyapunov/spectral analysis and positivity-preserving
time integration.
"""

from .errors import DomainError, InfeasibleError, NumericError, StiffnessError
from .lattice import DispersionConfig, LatticeConfig, Ray, enumerate_rays, \
    primitive_direction, ray_index_count
from .kernels import Kernel
from .collision import ConservedQuantities, c12_rhs, c13_rhs, c22_rhs, \
    combined_rhs, conserved
from .gspace import ReversiblePair, f_to_g, g_rhs, g_to_f, reversible_pairs
from .equilibrium import EquilibriumSolution, bose_solution, \
    bose_solution_from_energy, bose_state, c22_solution, energy_of_rho, \
    equilibrium_state, solve_c22_equilibrium, solve_rho, two_param_solution, \
    two_param_state
from .network import PersistenceReport, Reaction, ReactionNetwork, \
    build_c12_network, c13_skeleton_network, c22_skeleton_network, \
    check_p_semiflow, mass_action_rhs, minimal_siphons, persistence_certificate
from .analysis import RateFit, SpectralReport, fit_rate, linearize, \
    lyapunov_f, lyapunov_g, lyapunov_gradient_g, quadratic_form_samples
from .integrator import CompiledSystem, IntegratorOptions, Trajectory, \
    compile_system, integrate, integrate_f
from .run import RunResult, kernels_for_mode, random_positive_state, \
    run_lattice, run_simulation

__version__ = "0.1.0"
