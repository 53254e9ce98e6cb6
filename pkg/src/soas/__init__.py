"""E-unification for second-order abstract syntax."""
from .engine import (Refuted, Solution, Solver, Strategy, Unknown, Verified, Witness, check_unifier,
                     solve, subsumes)
from .equational import Axiom, EqualityCertificate, Presentation, check_certificate, equal_modulo
from .kernels import IMPL
from .subst import MetaSubstitution, apply_meta, compose
from .syntax import Constraint, MetaDecl, OperatorDecl, Signature, SoasError, UnificationProblem
from .terms import Meta, Op, Var

__version__ = "0.1.0"
