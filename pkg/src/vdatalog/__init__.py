"""Variability-aware Datalog: bottom-up inference over presence-condition-annotated facts."""

from .engine import (AnnotatedRelation, Database, EngineConfig, InferenceStats, SymbolTable,
                     infer, post_prune, resolve_rule)
from .errors import (ConfigurationLimitError, DatalogSyntaxError, FactFileError, ProgramError,
                     VDatalogError)
from .facts_io import FactRecord, load_inputs, read_facts, write_facts
from .oracle import check_theorem1, naive_infer, plain_infer, restrict
from .pcbdd import BddManager, Configuration, FeatureTable, PresenceCondition, equivalent_under
from .syntax import Program, parse_pc, parse_program, pc_to_bdd, print_pc

__version__ = "0.1.0"

__all__ = [
    "AnnotatedRelation", "BddManager", "Configuration", "ConfigurationLimitError", "Database",
    "DatalogSyntaxError", "EngineConfig", "FactFileError", "FactRecord", "FeatureTable",
    "InferenceStats", "PresenceCondition", "Program", "ProgramError", "SymbolTable",
    "VDatalogError", "check_theorem1", "equivalent_under", "infer", "load_inputs", "naive_infer",
    "parse_pc", "parse_program", "pc_to_bdd", "plain_infer", "post_prune", "print_pc",
    "read_facts", "resolve_rule", "restrict", "write_facts",
]
