"""Jump-level Monte Carlo of subordinator paths up to first passage."""
from .core import (
    SAMPLE_CSV_HEADER, PassageBatch, PassageSample, TruncationPolicy, batch_passages,
    plan, sample_passage, small_jump_drift, write_samples_csv,
)

__all__ = [
    "SAMPLE_CSV_HEADER", "PassageBatch", "PassageSample", "TruncationPolicy",
    "batch_passages", "plan", "sample_passage", "small_jump_drift", "write_samples_csv",
]
