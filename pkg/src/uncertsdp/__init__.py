"""Error and disturbance of quantum devices, computed by semidefinite programming.

Modules:

- :mod:`uncertsdp.numerics`: linear-algebra helpers and tolerances
- :mod:`uncertsdp.channels`: Choi operators, instruments, dilations
- :mod:`uncertsdp.sdp`: a dense primal-dual interior-point solver and a small modeling layer
- :mod:`uncertsdp.measures`: diamond distance, error and disturbance measures
- :mod:`uncertsdp.bounds`: complementarity bounds, relation checks, Gaussian formulas
- :mod:`uncertsdp.gallery`: worked examples with known answers
- :mod:`uncertsdp.io` and :mod:`uncertsdp.cli`: channel files and the ``uncert`` command
"""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundReport,
    GaussianParams,
    check_corollary1,
    check_theorem1,
    check_theorem2,
    demerit_bound,
    gaussian_bound,
    gaussian_overlap,
    measurement_gap,
    optimal_sigma_f,
    overlap_bound,
    overlap_matrix,
)
from .channels import (  # noqa: E402
    Basis,
    ChoiOperator,
    DecompositionError,
    Instrument,
    Isometry,
    compose,
    computational_basis,
    conjugate_basis,
    decompose_joint,
    ideal_measurement,
    ideal_preparation,
    mz_apparatus,
    pinching,
    random_channel,
    random_instrument,
    stinespring,
)
from .measures import (  # noqa: E402
    MeasureResult,
    best_measurement_error,
    complementarity,
    constant_radius,
    diamond_distance,
    epsilon,
    eta,
    eta_hat,
    eta_tilde,
    nu,
    unentangled_distinguishability,
)
from .sdp import SdpProblem, SolverFailure, solve  # noqa: E402
