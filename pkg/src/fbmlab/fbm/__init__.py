from fbmlab.fbm.decomposition import (
    Decomposition,
    decompose,
    dr_process,
    dr_variance_oracle,
    dr_variance_printed,
    TruncationCheck,
    truncation_check,
)
from fbmlab.fbm.driver import DriverPath, common_history_length, far_cell_edges, sample_driver
from fbmlab.fbm.generators import (
    CHOLESKY,
    CIRCULANT,
    MVN,
    FbmPath,
    cholesky_path,
    circulant_path,
    mvn_path,
)
from fbmlab.fbm.grid import HurstParam, TimeGrid, as_hurst
from fbmlab.fbm.kernels import ch_coefficient, fbm_covariance, history_length, tail_variance

__all__ = [
    "HurstParam",
    "TimeGrid",
    "as_hurst",
    "ch_coefficient",
    "fbm_covariance",
    "history_length",
    "tail_variance",
    "DriverPath",
    "sample_driver",
    "far_cell_edges",
    "common_history_length",
    "FbmPath",
    "mvn_path",
    "cholesky_path",
    "circulant_path",
    "MVN",
    "CHOLESKY",
    "CIRCULANT",
    "Decomposition",
    "decompose",
    "dr_process",
    "dr_variance_oracle",
    "dr_variance_printed",
    "TruncationCheck",
    "truncation_check",
]
