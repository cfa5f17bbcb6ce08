"""Twisted exterior calculus and cotangent-bundle reduction checks.

The package evaluates differential forms through second-order forward
jets on explicit charts, builds the twisted structures of cotangent
bundles, and verifies the reduction identities (momentum regularity,
foliation frames, shift and quotient maps, the embedding composite) on a
catalog of charted scenarios, emitting structured residual reports.
"""

__version__ = "0.1.0"

from .forms import (  # noqa: F401
    Chart,
    ChartPoint,
    Form,
    LCSStructure,
    SmoothMap,
    VectorField,
    conformal_rescale,
    exterior_derivative,
    interior_product,
    lie_derivative,
    pullback,
    twisted_derivative,
    twisted_lie_derivative,
    wedge,
)
from .jets import Jet2, fd_oracle, jet_arith  # noqa: F401
from .linalg import (  # noqa: F401
    SubspaceBasis,
    null_space,
    principal_angle_distance,
    solve_linear,
)
from .cotangent import (  # noqa: F401
    CotangentChart,
    cotangent_chart,
    cotangent_lift_map,
    lcs_form,
    lift_fundamental_field,
    tautological_form,
    theta_omega_dual,
)
from .reduction import (  # noqa: F401
    ActionSpec,
    LevelSection,
    LieAlgebraSpec,
    QuotientData,
    foliation_frame,
    level_set_point,
    momentum_map,
    phi0_map,
    shift_map,
)
from .catalog import build_scenario, scenario_names  # noqa: F401
from .checks import run_suite  # noqa: F401
from .report import RunConfig, emit_report, parse_config  # noqa: F401
