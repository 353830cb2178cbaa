"""Exact symbolic verifier for the difference-operator realization of
shifted quantum affine symmetric pairs of split simply-laced type."""

from .cartan import (Instance, InstanceError, ValidationReport, cartan_entry,
                     load_instance, load_instance_file, validate)
from .gklo import GKLO, ModeTable, SpectralRational
from .qtorus import TorusElement, q_bracket, torus_apply, torus_equals, torus_mul
from .scalars import (Poly, Scalar, VariableTable, scalar_arith, scalar_equals,
                      scalar_sum, t_reduce, u_shift)
from .verifier import (CheckReport, DeltaSupport, Engine, check_lemma,
                       delta_evaluate, run_lemmas, run_relations)

__all__ = [
    "Instance", "InstanceError", "ValidationReport", "cartan_entry",
    "load_instance", "load_instance_file", "validate",
    "GKLO", "ModeTable", "SpectralRational",
    "TorusElement", "q_bracket", "torus_apply", "torus_equals", "torus_mul",
    "Poly", "Scalar", "VariableTable", "scalar_arith", "scalar_equals",
    "scalar_sum", "t_reduce", "u_shift",
    "CheckReport", "DeltaSupport", "Engine", "check_lemma", "delta_evaluate",
    "run_lemmas", "run_relations",
]

__version__ = "0.1.0"
