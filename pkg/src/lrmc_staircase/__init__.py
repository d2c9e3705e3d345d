"""Uniqueness and recovery of low-rank matrix completion on staircase patterns."""
from .completion import (Infeasible, NonUnique, Undecided, Unique, complete_two_block,
                         decide_and_complete, witness_nonunique)
from .linalg import (BlockPartition, Tolerances, is_psd, numerical_rank, pseudoinverse,
                     range_contains, schur_complement)
from .pattern import Biclique, SampledInstance, corner_blocks, detect_chain, validate_chain
from .psd import PsdInstance, psd_complete, psd_counterexample

__version__ = "0.1.0"
