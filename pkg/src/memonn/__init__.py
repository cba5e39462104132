"""Memristor oscillator networks: circuit transients, PRC/PPV phase macromodels
and oscillatory associative memory."""

from .errors import (BadDimensions, BadDuration, ConfigError, Diverged, FitFailed, MemonnError,
                     NoEquilibrium, NoNdr, NoOperatingPoint, NoOscillation, NotConverged,
                     NumericOverflow)
from .memristor import MemristorParams, dc_sweep, find_operating_point, load_params, surrogate
from .transient import CircuitParams, prepare_oscillator, simulate_circuit, simulate_full_network
from .ppv import PulseSpec, extract_prc, fit_fourier, prc_to_ppv
from .phasenet import PhaseNetConfig, simulate_averaged, simulate_direct, simulate_pair
from .onn import OnnExperiment, PatternSet, hebbian_weights, run_recognition

__version__ = "0.1.0"
