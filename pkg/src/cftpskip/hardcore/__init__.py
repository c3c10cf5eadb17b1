"""Hard-core (independent set) model: dynamics, bounding chains, fast samplers."""
from .engine import (
    DEFAULT_MAX_LETTERS,
    FORWARD_METHODS,
    SAMPLERS,
    STAT_FIELDS,
    SampleBatch,
    forward_times,
    replicate,
    sample,
)
from .model import (
    ActiveDelta,
    Add,
    AddSwap,
    CountedBound,
    Fugacities,
    HardcoreAutomaton,
    HardcoreBound,
    Remove,
    active_partition,
    decode_letter,
    dg_apply,
    dg_bound_apply,
    draw_conditional,
    encode_letter,
    gibbs_apply,
    gibbs_bound_apply,
    update_active,
)

__all__ = [
    "ActiveDelta",
    "Add",
    "AddSwap",
    "CountedBound",
    "DEFAULT_MAX_LETTERS",
    "FORWARD_METHODS",
    "Fugacities",
    "HardcoreAutomaton",
    "HardcoreBound",
    "Remove",
    "SAMPLERS",
    "STAT_FIELDS",
    "SampleBatch",
    "active_partition",
    "decode_letter",
    "dg_apply",
    "dg_bound_apply",
    "draw_conditional",
    "encode_letter",
    "forward_times",
    "gibbs_apply",
    "gibbs_bound_apply",
    "replicate",
    "sample",
    "update_active",
]
