"""Asymmetric 1D scattering of two-level atoms off shaped laser couplings.

Library layout:

- :mod:`asymscat.units`        physical <-> dimensionless conversions
- :mod:`asymscat.profiles`     coupling profiles, symmetry classes, device rules
- :mod:`asymscat.potential`    the non-local ground-channel kernel
- :mod:`asymscat.imbedding`    exact two-channel amplitudes (invariant imbedding)
- :mod:`asymscat.nystrom`      independent integral-equation cross-check
- :mod:`asymscat.semiclassical` trajectory dynamics and rotation caricature
- :mod:`asymscat.optimize`     gradient-ascent device design
- :mod:`asymscat.cli`          command-line interface

The invariant-imbedding hot loop runs on a compiled extension when available
(``asymscat.imbedding.BACKEND`` reports which kernel was selected).
"""

__version__ = "0.1.0"

from .imbedding import (
    BACKEND,
    ChannelMatrices,
    IntegrationError,
    RiccatiBlowupError,
    ScatterJob,
    solve_both,
    solve_left_incidence,
    solve_right_incidence,
    sweep_velocity,
)
from .nystrom import SingularSystemError, convergence_study, solve_ground
from .optimize import AnsatzError, DeviceTarget, auto_init, objective, optimize
from .potential import (
    ChannelThresholdError,
    EffectiveParams,
    NonlocalKernel,
    build_kernel,
    effective_params,
)
from .profiles import (
    DEVICE_RULES,
    GaussianTerm,
    ProfileSchemaError,
    RabiProfile,
    SymmetryReport,
    allowed_devices,
    classify_profile,
    classify_with_energy,
    load_profile,
    make_preset,
    preset_profile,
    save_profile,
)
from .semiclassical import (
    RotationModel,
    compose_rotations,
    estimate_parameters,
    integrate_trajectory,
)
from .units import (
    Channel2,
    DimensionlessParams,
    PhysicalScales,
    channel2_wavenumber,
    to_dimensionless,
)

__all__ = [
    "__version__",
    "BACKEND",
    "AnsatzError",
    "Channel2",
    "ChannelMatrices",
    "ChannelThresholdError",
    "DEVICE_RULES",
    "DeviceTarget",
    "DimensionlessParams",
    "EffectiveParams",
    "GaussianTerm",
    "IntegrationError",
    "NonlocalKernel",
    "PhysicalScales",
    "ProfileSchemaError",
    "RabiProfile",
    "RiccatiBlowupError",
    "RotationModel",
    "ScatterJob",
    "SingularSystemError",
    "SymmetryReport",
    "allowed_devices",
    "auto_init",
    "build_kernel",
    "channel2_wavenumber",
    "classify_profile",
    "classify_with_energy",
    "compose_rotations",
    "convergence_study",
    "effective_params",
    "estimate_parameters",
    "integrate_trajectory",
    "load_profile",
    "make_preset",
    "objective",
    "optimize",
    "preset_profile",
    "save_profile",
    "solve_both",
    "solve_ground",
    "solve_left_incidence",
    "solve_right_incidence",
    "sweep_velocity",
    "to_dimensionless",
]
