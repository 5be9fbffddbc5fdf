"""SNAIL-based artificial radiation pressure: circuit quantization, effective
Hamiltonian, Fock-space oracles, linearized response, fits and a CLI."""

from .circuit import FluxBias, ModeSpectrum, PotentialExpansion, SnailParams, mode_spectrum
from .effective import EffectiveParams, HybridParams, effective_coefficients, find_zero_kerr_flux
from .config import DeviceConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "DeviceConfig",
    "EffectiveParams",
    "FluxBias",
    "HybridParams",
    "ModeSpectrum",
    "PotentialExpansion",
    "SnailParams",
    "effective_coefficients",
    "find_zero_kerr_flux",
    "load_config",
    "mode_spectrum",
]
