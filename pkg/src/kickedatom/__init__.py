"""kickedatom: quantum and classical dynamics of the periodically kicked
one-dimensional Rydberg atom, with golden-rule and photonic-ladder models and
the analysis tools to extract localization signatures.
"""

__version__ = "0.1.0"

from .units import (SystemParams, RegimeThresholds, ParameterError,
                    derive_params, thresholds, field_equivalent)
from .series import ObservableSeries, geometric_checkpoints
from .basis import EnergyBasis, BasisError, build_basis, initial_state_index
from .quantum import (MaskPolicy, QuantumState, FloquetOperator,
                      FloquetDecomposition, initial_state, one_period_op,
                      floquet_decompose, evolve_direct, evolve_floquet,
                      survival_probability, mean_n, spectral_distribution)
from .classical import (ClassicalEnsemble, PhasePoint, sample_microcanonical,
                        propagate_coulomb, apply_kick, lyapunov_estimate)
from .classical import run as run_classical
from .stark import (StarkSpectrum, RateTable, diagonalize_stark,
                    golden_rule_rates, floquet_lifetimes)
from .ladder import (Ladder, LadderMatrix, LadderRangeError, build_ladder,
                     assemble_matrix, evolve_amplitudes, localization_metrics)
from .analysis import (PowerLawFit, FrequencyScan, FractalEstimate,
                       fit_power_law, fit_mean_n_power_law, tau_l_estimate,
                       log_average, extrema_spacing, fractal_dimension)
from .orchestrator import (ConfigError, load_config, config_hash, plan_tasks,
                           run_experiment, resume, analyze)

__all__ = [
    "__version__",
    "SystemParams", "RegimeThresholds", "ParameterError",
    "derive_params", "thresholds", "field_equivalent",
    "ObservableSeries", "geometric_checkpoints",
    "EnergyBasis", "BasisError", "build_basis", "initial_state_index",
    "MaskPolicy", "QuantumState", "FloquetOperator", "FloquetDecomposition",
    "initial_state", "one_period_op", "floquet_decompose",
    "evolve_direct", "evolve_floquet",
    "survival_probability", "mean_n", "spectral_distribution",
    "ClassicalEnsemble", "PhasePoint", "sample_microcanonical",
    "propagate_coulomb", "apply_kick", "lyapunov_estimate", "run_classical",
    "StarkSpectrum", "RateTable", "diagonalize_stark", "golden_rule_rates",
    "floquet_lifetimes",
    "Ladder", "LadderMatrix", "LadderRangeError", "build_ladder",
    "assemble_matrix", "evolve_amplitudes", "localization_metrics",
    "PowerLawFit", "FrequencyScan", "FractalEstimate",
    "fit_power_law", "fit_mean_n_power_law", "tau_l_estimate",
    "log_average", "extrema_spacing", "fractal_dimension",
    "ConfigError", "load_config", "config_hash", "plan_tasks",
    "run_experiment", "resume", "analyze",
]
