from .linear import (ScalarLinearDae, SingleIterationResult, build_scalar_linear,
                     verify_corrector_error_formula, verify_single_iteration_error)
from .network import ClassicalNetwork, NetworkCase, fault_events, trip_events
from .smib import SmibParams, build_smib
from .multimachine import CaseFile, EventSpec, build_multimachine, load_case, parse_case
