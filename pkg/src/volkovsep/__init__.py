"""Volkov states, their plane-wave content, and energy-sign separation in a laser field."""

__version__ = "0.1.0"

from . import kernels
from .errors import NonContractionError, NumericalError, TailError, ValidationError, VolkovSepError
from .spinors import FourMomentum, free_spinors, hamiltonian, make_gamma_set, volkov_spinors
from .volkov import Envelope, PlaneWaveFieldSpec, dirac_residual, positron_volkov_eval, volkov_eval
from .modes import ModeTable, mode_coefficients_bessel, mode_coefficients_quadrature, negative_energy_content
from .grid import GridSpec, SpinorField, gaussian_packet, sample_volkov, volkov_grid
from .separation import SeparationReport, split, time_of_flight
from .scattering import CompactField, born_solve, channel_split, free_history
from .observables import Trajectory, trajectory
from .barrier import BarrierSpec, scattering_coefficients, transfer_matrix

__all__ = [
    "kernels", "VolkovSepError", "ValidationError", "NumericalError", "TailError", "NonContractionError",
    "FourMomentum", "free_spinors", "hamiltonian", "make_gamma_set", "volkov_spinors",
    "Envelope", "PlaneWaveFieldSpec", "dirac_residual", "positron_volkov_eval", "volkov_eval",
    "ModeTable", "mode_coefficients_bessel", "mode_coefficients_quadrature", "negative_energy_content",
    "GridSpec", "SpinorField", "gaussian_packet", "sample_volkov", "volkov_grid",
    "SeparationReport", "split", "time_of_flight",
    "CompactField", "born_solve", "channel_split", "free_history",
    "Trajectory", "trajectory",
    "BarrierSpec", "scattering_coefficients", "transfer_matrix",
]
