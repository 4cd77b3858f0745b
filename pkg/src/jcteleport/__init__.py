"""Teleportation of two-qubit states through a projected Jaynes-Cummings channel."""
from .channel import AlphaSet, ChannelParams, alpha_set, channel_state, coherent_weight, rabi
from .errors import JCError, NumericError, OutputError, ValidationError
from .fisher import QfiResult, teleported_qfi
from .teleport import (
    BobState,
    InputState,
    bob_state_ftp,
    bob_state_stp,
    fidelity_closed_ftp,
    fidelity_closed_stp,
    fidelity_overlap,
)

__version__ = "0.1.0"
