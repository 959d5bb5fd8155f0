"""Simulation and analysis of four-pulse T^3 atom interferometers."""

from ._core import (
    BranchResult,
    DomainError,
    GaussianPacket,
    InterferometerSequence,
    ParseError,
    PhysicalConstants,
    PulseEvent,
    SequenceFile,
    alpha_curve,
    alpha_factor,
    extract_phase_from_fringe,
    fit_gradient,
    fringe_scan_numeric,
    gaussian_contrast,
    interferometer_phase,
    parse_sequence_file,
    phase_shift,
    plus_two_field_from_detuning,
    run_phase,
    run_sequence_numeric,
    solve_closure,
    total_laser_phase,
)

__all__ = [
    "BranchResult",
    "DomainError",
    "GaussianPacket",
    "InterferometerSequence",
    "ParseError",
    "PhysicalConstants",
    "PulseEvent",
    "SequenceFile",
    "alpha_curve",
    "alpha_factor",
    "extract_phase_from_fringe",
    "fit_gradient",
    "fringe_scan_numeric",
    "gaussian_contrast",
    "interferometer_phase",
    "parse_sequence_file",
    "phase_shift",
    "plus_two_field_from_detuning",
    "run_phase",
    "run_sequence_numeric",
    "solve_closure",
    "total_laser_phase",
]
