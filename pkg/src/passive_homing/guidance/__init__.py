from .factory import create_guidance
from .pn import PnGuidance, pn_command
from .policy import PolicyGuidance
from .zem import ZemCommand, ZemGuidance, pulse_map, zem_command

__all__ = [
    "create_guidance",
    "PnGuidance",
    "pn_command",
    "PolicyGuidance",
    "ZemCommand",
    "ZemGuidance",
    "pulse_map",
    "zem_command",
]
