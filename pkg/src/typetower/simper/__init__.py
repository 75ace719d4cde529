"""The Simper language: parser, type checker, desugarer and interpreter."""

from .ast import *  # noqa: F401,F403
from .ast import Program, format_program, program_size, walk
from .desugar import desugar, is_core
from .interp import ArrayV, ExecResult, Outcome, SimperRuntimeError, interpret
from .parser import SimperSyntaxError, parse_simper
from .types import (
    ArrayT, BOOL, NAT, SYM, SimperType, SimperTypeError, TypeReport, check, typecheck,
)
