"""Classical Birkhoff normal forms at a critical point of V, barrier-top
resonance lattices, and recovery of the even Taylor series of V."""

__version__ = "0.1.0"

from .bnf import (  # noqa: E402
    CanonicalChain,
    NormalForm,
    compute_bnf,
    lie_transform,
    normal_form,
    solve_homological,
    torus_average,
    unscale_normal_form,
)
from .model import (  # noqa: E402
    PotentialSpec,
    build_symbol,
    check_nonresonance,
    complex_scale,
    frequencies,
    rescale,
    scaled_symbol,
)
from .oracle import OracleConfig, oracle_resonances  # noqa: E402
from .poly import ActionPolynomial, PhasePolynomial, poisson_bracket  # noqa: E402
from .recovery import averaging_coefficient, recover_taylor  # noqa: E402
from .resonances import (  # noqa: E402
    FitReport,
    ResonanceList,
    estimate_structure,
    fit_normal_form,
    generate_resonances,
    invert_from_resonances,
    label_resonances,
)
