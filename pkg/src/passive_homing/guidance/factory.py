"""Factory for creating guidance laws based on configuration"""

from pathlib import Path
from typing import Optional

from ..errors import ConfigurationError
from ..interfaces import GuidanceLaw
from ..models import GuidanceSelector, MissileConfig


def create_guidance(
    selector: GuidanceSelector,
    missile: Optional[MissileConfig] = None,
    checkpoint: Optional[Path] = None,
    zem_gain: float = 3.0,
    sample: bool = False,
) -> GuidanceLaw:
    """Create a guidance law by selector name

    Args:
        selector: ``rl``, ``zem`` or ``pn``
        missile: Missile constants for the pulse mapping
        checkpoint: Policy checkpoint, required for ``rl``
        zem_gain: Navigation constant for ``zem`` and ``pn``
        sample: Sample RL actions instead of acting greedily

    Returns:
        GuidanceLaw implementation

    Raises:
        ConfigurationError: If ``rl`` is selected without a usable checkpoint
    """
    if selector == "rl":
        if checkpoint is None:
            raise ConfigurationError("The rl selector requires a policy checkpoint")
        if not Path(checkpoint).is_file():
            raise ConfigurationError(f"Policy checkpoint not found: {checkpoint}")
        from ..storage.checkpoints import load_checkpoint
        from .policy import PolicyGuidance

        return PolicyGuidance(load_checkpoint(checkpoint).policy, sample=sample)
    elif selector == "zem":
        from .zem import ZemGuidance

        return ZemGuidance(missile, n=zem_gain)
    elif selector == "pn":
        from .pn import PnGuidance

        return PnGuidance(missile, n=zem_gain)
    raise ConfigurationError(f"Unknown guidance selector '{selector}'")
