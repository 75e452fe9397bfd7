"""
Exception hierarchy for corrdyn
Numeric failures are separated from domain errors so the CLI can map them to exit codes
"""


class CorrDynError(Exception):
    """Base class for every error raised by corrdyn"""


class NumericError(CorrDynError):
    """A numerical procedure failed to produce a certified answer"""


# --- correspondence ---

class BranchPointError(CorrDynError):
    """Evaluation requested at a branch point of the correspondence"""


class InvalidPairError(CorrDynError):
    """(z, w) does not satisfy (w - c)^q = z^p within tolerance"""


class DegenerateSampleError(CorrDynError):
    """A sample point is too close to 0 or c"""


class ParameterError(CorrDynError):
    """Parameters violate the preconditions of an operation"""


# --- cycles ---

class NoConvergenceError(NumericError):
    """Newton iteration did not converge"""


class BranchCollapseError(NumericError):
    """An orbit passed through a branch point during iteration"""


class ContinuationStuckError(NumericError):
    """Continuation step size underflowed"""


# --- bundle / solenoid ---

class InvalidAnnulusError(CorrDynError):
    """Annulus bounds are not valid for this parameter"""


class EmptyOrbitError(CorrDynError):
    """Orbit segment has no steps"""


class ShortOrbitError(CorrDynError):
    """Orbit segment is too short for the requested operation"""


class DepthError(CorrDynError):
    """Requested depth exceeds the available orbit data"""


class CapExceededError(CorrDynError):
    """Output size would exceed the configured cap"""


class ShortSequenceError(CorrDynError):
    """Symbol sequence is shorter than the requested truncation"""


# --- motion ---

class ShadowEscapeError(NumericError):
    """A shadowing orbit drifted farther than epsilon from the base orbit"""


class AmbiguousBranchError(NumericError):
    """Two inverse branches are equally close to the base orbit"""


class InsufficientSamplesError(CorrDynError):
    """Not enough samples at any scale to estimate dilatation"""


# --- render ---

class StarvationError(NumericError):
    """Backward sampling kept leaving the annulus"""


class NoAttractorError(NumericError):
    """No attracting region was found for forward sampling"""
