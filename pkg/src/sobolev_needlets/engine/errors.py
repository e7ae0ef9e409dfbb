class SobolevNeedletsError(Exception):
    pass


class HarmonicDomainError(SobolevNeedletsError):
    pass


class QuadratureError(SobolevNeedletsError):
    pass


class QuadratureConvergenceError(QuadratureError):
    pass


class WindowParameterError(SobolevNeedletsError):
    pass


class FrameIndexError(SobolevNeedletsError):
    pass


class DensityValidationError(SobolevNeedletsError):
    pass


class SamplingError(SobolevNeedletsError):
    pass


class EstimatorInputError(SobolevNeedletsError):
    pass


class LepskiConfigError(SobolevNeedletsError):
    pass


class CalibrationError(SobolevNeedletsError):
    pass


class RateModelError(SobolevNeedletsError):
    pass


class ExperimentNotFoundError(SobolevNeedletsError):
    pass


class ExperimentSpecValidationError(SobolevNeedletsError):
    pass


class ConfigError(SobolevNeedletsError):
    pass
