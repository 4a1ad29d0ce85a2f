"""Exception types raised across the pipeline."""


class GraspPipelineError(Exception):
    """Base class for all library errors."""


class InvalidDepthError(GraspPipelineError, ValueError):
    pass


class BehindCameraError(GraspPipelineError, ValueError):
    pass


class EmptyCloudError(GraspPipelineError, ValueError):
    """No pixel of a depth map hit the scene."""


class ScaleUnavailableError(GraspPipelineError, ValueError):
    """No patch landed on a valid dense-depth pixel."""


class NoCandidatesError(GraspPipelineError, ValueError):
    pass


class JointLimitError(GraspPipelineError, ValueError):
    pass


class NumericalFailureError(GraspPipelineError, ArithmeticError):
    pass
