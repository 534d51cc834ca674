"""Hardy-paradox workbench: exact no-signaling LPs, quantum Hardy states, CHSH."""

from .behavior import (
    Behavior,
    Scenario,
    behavior_from_table,
    decode_index,
    deterministic_box,
    encode_index,
    load_box,
    marginal,
    no_signaling_check,
    preset,
    save_box,
)
from .bell import chsh, chsh_max_over_signs, correlator
from .hardy import HardyPattern, hardy_check, local_realism_scan, standard_pattern
from .lp import build_hardy_lp, coordinate_ranges, lp_solve
from .quantum import ObservablePair, hardy_state, optimize_hardy, success_probability

__version__ = "0.1.0"
