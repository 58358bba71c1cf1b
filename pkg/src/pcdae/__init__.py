"""Partitioned and simultaneous integrators for semi-explicit index-1 DAEs."""

from .kernels import BACKEND
from .errors import (ConfigError, InitializationFailure, MalformedCase, NewtonDivergence,
                     PcdaeError, SingularJacobian, StepSizeUnderflow, VariableMismatch)

__version__ = "0.1.0"
