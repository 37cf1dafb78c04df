"""Left-handed transmission line: dispersion, Fock-space oracle, current moments and NRI sweeps."""

from .dispersion import CircuitParams, Dispersion, DispersionError, dispersion
from .fock import DsfsParams, FockSpace, TruncationError, build_space, oracle_moments
from .moments import MomentVariant, Units, closed_form_moments, normalization_F, variance
from .nri import nri_from_beta, nri_from_fluctuation, roundtrip_error
from .sweep import SweepConfig, parse_config, preset, run_sweep, serialize_config

__all__ = [
    "CircuitParams",
    "Dispersion",
    "DispersionError",
    "dispersion",
    "DsfsParams",
    "FockSpace",
    "TruncationError",
    "build_space",
    "oracle_moments",
    "MomentVariant",
    "Units",
    "closed_form_moments",
    "normalization_F",
    "variance",
    "nri_from_beta",
    "nri_from_fluctuation",
    "roundtrip_error",
    "SweepConfig",
    "parse_config",
    "preset",
    "run_sweep",
    "serialize_config",
]
