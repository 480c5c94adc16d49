"""Operator spreading in brickwork random unitary circuits with
unitary-invariant two-qudit gate distributions.

The package maps the circuit-averaged Pauli-string dynamics onto a
classical stochastic growth model and computes butterfly velocities,
front diffusion constants, binary-relaxation times and OTOC curves,
both from truncated transfer matrices and from direct Monte Carlo.
"""

__version__ = "0.1.0"

from .errors import EnsembleValidityError, NumericalError

__all__ = ["EnsembleValidityError", "NumericalError", "__version__"]
