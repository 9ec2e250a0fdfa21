"""Exception hierarchy for the pipeline.

Validation-type errors (bad config, bad input files) exit the CLI with
status 1; runtime/numerical errors exit with status 2.
"""


class PipelineError(Exception):
    """Base class for all package errors."""


class ConfigError(PipelineError):
    """Config or scenario file could not be parsed."""


class ValidationError(PipelineError):
    """A value parsed fine but violates an invariant."""


class TraceError(PipelineError):
    """Demonstration trace ingestion or validation failed."""


class GenerationError(PipelineError):
    """Synthetic demonstration generation failed (e.g. simulated collision)."""


class FitError(PipelineError):
    """A least-squares or distribution fit could not be performed."""


class OptimizationError(PipelineError):
    """The trajectory optimizer hit a non-finite cost."""


class ClusteringError(PipelineError):
    """K-means could not run on the given points."""
