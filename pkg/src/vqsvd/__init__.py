"""Variational quantum singular value decomposition on a dense statevector simulator."""

__version__ = "0.1.0"

from .applications import (  # noqa: E402
    CompressionReport,
    DegenerateProjectionError,
    PolarResult,
    RecommendationOutput,
    benchmark_ansatz,
    compress_image,
    polar_from_factors,
    polar_via_vqsvd,
    project_row,
    recommend,
)
from .circuit import (  # noqa: E402
    AnsatzSpec,
    ParamCircuit,
    ansatz_candidate,
    ansatz_hardware_efficient,
    apply_circuit,
    realize_unitary,
)
from .decomposition import VQSVD  # noqa: E402
from .estimator import (  # noqa: E402
    EstimatorConfig,
    hadamard_test_im,
    hadamard_test_re,
    matrix_element,
)
from .linalg import SvdTriple, classical_svd, polar_decompose, reconstruct_rank_t  # noqa: E402
from .pauli import (  # noqa: E402
    CyclicShift,
    LcuDecomposition,
    PauliString,
    circulant_decompose,
    importance_sample_terms,
    lcu_reconstruct,
    pauli_decompose,
    sample_count,
)
from .solver import (  # noqa: E402
    VqsvdConfig,
    VqsvdResult,
    extract_vectors,
    fold_signs,
    gradient,
    loss,
    loss_of_unitaries,
    run,
)
from .verification import (  # noqa: E402
    QualityReport,
    epsilon_d,
    epsilon_v,
    majorization_check,
    quality_report,
    vqfne_run,
)

__all__ = [name for name in dir() if not name.startswith("_")]
