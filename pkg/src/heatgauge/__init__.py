"""heatgauge: adiabatic connections on work line bundles.

Symbolic expressions, single-chart exterior calculus, work systems with
gauge transforms, curvature and Frobenius integrability checks, numerical
horizontal lifts with holonomy and geometric phase, and local entropy /
temperature reconstruction.
"""

from .expr import (Expression, EvalError, ExpressionError, ParseError,
                   compile_expression, differentiate, evaluate, parse, unparse)
from .geometry import (Chart, DifferentialForm, VectorField, coordinate_field,
                       d_coord, exterior_derivative, lie_bracket, pair,
                       scalar_field, wedge)
from .bundle import (GaugeTransform, WorkSystem, apply_gauge, catalog,
                     contact3, flat3, heat_form, ideal_gas,
                     system_from_work_form, verify_kernel_condition, wankel,
                     work_form, zero_work)
from .connection import (CurvatureMatrix, FlatnessReport, curvature_matrix,
                         flatness, frobenius_defect, horizontal_lift_vector,
                         vertical_component)
from .lift import (BaseCurve, LiftResult, commutator_probe, lift_curve,
                   loop_holonomy, square_loop, work_integral)
from .entropy import EntropyChart, ResidualSummary, reconstruct, residual_report
from .harness import (EquivalenceReport, JauchReport, PhaseReport,
                      default_loop_family, equivalence_test, jauch_test,
                      phase_demo, random_curved_system, random_flat_system)

__version__ = "0.1.0"

__all__ = [
    "Expression", "EvalError", "ExpressionError", "ParseError",
    "compile_expression", "differentiate", "evaluate", "parse", "unparse",
    "Chart", "DifferentialForm", "VectorField", "coordinate_field", "d_coord",
    "exterior_derivative", "lie_bracket", "pair", "scalar_field", "wedge",
    "GaugeTransform", "WorkSystem", "apply_gauge", "catalog", "contact3",
    "flat3", "heat_form", "ideal_gas", "system_from_work_form",
    "verify_kernel_condition", "wankel", "work_form", "zero_work",
    "CurvatureMatrix", "FlatnessReport", "curvature_matrix", "flatness",
    "frobenius_defect", "horizontal_lift_vector", "vertical_component",
    "BaseCurve", "LiftResult", "commutator_probe", "lift_curve",
    "loop_holonomy", "square_loop", "work_integral",
    "EntropyChart", "ResidualSummary", "reconstruct", "residual_report",
    "EquivalenceReport", "JauchReport", "PhaseReport", "default_loop_family",
    "equivalence_test", "jauch_test", "phase_demo", "random_curved_system",
    "random_flat_system",
]
