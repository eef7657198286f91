"""Behavioral simulator for FDCCII-based first-order all-pass circuits.

Builds or parses small netlists around the eight-terminal fully
differential current conveyor, solves them by dense modified nodal
analysis (complex AC and trapezoidal transient), and analyzes the
results: sweeps, pole extraction, tracking-gain sensitivities, all-pass
verification and THD. The numeric hot paths run in a compiled extension
when available, with a pure-Python fallback (see ``fdccsim._kernels``).
"""

from ._kernels import BACKEND
from .analysis import (
    FirstOrderTF,
    SensitivityReport,
    SweepGrid,
    SweepTable,
    VerificationReport,
    ac_sweep,
    closed_form_sensitivities,
    estimate_pole_from_fit,
    estimate_pole_from_phase,
    ideal_transfer,
    nonideal_transfer,
    pole_frequency,
    reference_params,
    reference_rc,
    sensitivities,
    verify_allpass,
)
from .errors import (
    CircuitError,
    NoFundamentalError,
    NonConvergenceError,
    NotAllPassLikeError,
    SingularSystemError,
)
from .mna import ComplexSystem, Solution, ac_gain, assemble_ac, solve
from .netlist import (
    GROUND,
    Ac,
    Capacitor,
    Element,
    Fdccii,
    FdcciiParams,
    Netlist,
    NodeId,
    Probe,
    Resistor,
    SaturationSpec,
    Sin,
    ValidationReport,
    VSource,
    Waveform,
    build_allpass_netlist,
    params_from_tracking_errors,
    replace_source_waveform,
    terminals,
    validate,
)
from .parser import ErrorKind, ParseError, parse, parse_value, serialize
from .transient import (
    PhasorMeasurement,
    ThdRow,
    TransientResult,
    measure_phasor,
    simulate,
    thd,
    thd_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # netlist
    "GROUND",
    "Ac",
    "Capacitor",
    "Element",
    "Fdccii",
    "FdcciiParams",
    "Netlist",
    "NodeId",
    "Probe",
    "Resistor",
    "SaturationSpec",
    "Sin",
    "ValidationReport",
    "VSource",
    "Waveform",
    "build_allpass_netlist",
    "params_from_tracking_errors",
    "replace_source_waveform",
    "terminals",
    "validate",
    # parser
    "ErrorKind",
    "ParseError",
    "parse",
    "parse_value",
    "serialize",
    # mna
    "ComplexSystem",
    "Solution",
    "ac_gain",
    "assemble_ac",
    "solve",
    # analysis
    "FirstOrderTF",
    "SensitivityReport",
    "SweepGrid",
    "SweepTable",
    "VerificationReport",
    "ac_sweep",
    "closed_form_sensitivities",
    "estimate_pole_from_fit",
    "estimate_pole_from_phase",
    "ideal_transfer",
    "nonideal_transfer",
    "pole_frequency",
    "reference_params",
    "reference_rc",
    "sensitivities",
    "verify_allpass",
    # transient
    "PhasorMeasurement",
    "ThdRow",
    "TransientResult",
    "measure_phasor",
    "simulate",
    "thd",
    "thd_sweep",
    # errors
    "CircuitError",
    "NoFundamentalError",
    "NonConvergenceError",
    "NotAllPassLikeError",
    "SingularSystemError",
]
