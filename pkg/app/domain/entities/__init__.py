"""
Entities - Core numerical objects of the laboratory.

Spaces, spectral data, kernels, energy curves and the reports built
from them. All are immutable after construction.
"""
from app.domain.entities.metric_measure_graph import MetricMeasureGraph
from app.domain.entities.spectral_decomposition import SpectralDecomposition
from app.domain.entities.kernel_matrix import KernelMatrix
from app.domain.entities.operator_matrix import OperatorMatrix
from app.domain.entities.energy_curve import EnergyCurve
from app.domain.entities.reports import (
    CheckStatus,
    SlopeFit,
    BoundFitReport,
    SeminormReport,
    CriticalExponentReport,
    InequalityReport,
    json_safe,
)

__all__ = [
    "MetricMeasureGraph",
    "SpectralDecomposition",
    "KernelMatrix",
    "OperatorMatrix",
    "EnergyCurve",
    "CheckStatus",
    "SlopeFit",
    "BoundFitReport",
    "SeminormReport",
    "CriticalExponentReport",
    "InequalityReport",
    "json_safe",
]
