"""Named evaluation scenarios

Each preset is a set of scenario overrides plus the campaign's worst-case
flag, applied on top of a run document.
"""

from typing import Any, Literal, NamedTuple, get_args

from .errors import ConfigurationError
from .models import RunConfig

PresetName = Literal[
    "table5", "table6", "table7", "table8", "zero-error", "extended-ic"
]
PRESET_NAMES: tuple[str, ...] = get_args(PresetName)


class Preset(NamedTuple):
    scenario: dict[str, Any]
    fixed_worst_case: bool = False
    description: str = ""


PRESETS: dict[str, Preset] = {
    "table5": Preset({}, False, "Randomized initial conditions"),
    "table6": Preset(
        {}, True, "Heading error, attitude error and target accel at maxima"
    ),
    "table7": Preset(
        {"maneuver_kind": "barrel-roll", "accel_pinned": True},
        False,
        "Barrel-roll target at maximum accel, weave period 1-5 s",
    ),
    "table8": Preset(
        {"heading_error_deg": (6.0, 6.0), "accel_pinned": True},
        False,
        "6 degree heading error and maximum target accel",
    ),
    "zero-error": Preset(
        {
            "heading_error_deg": (0.0, 0.0),
            "attitude_error_deg": (0.0, 0.0),
            "target_accel_max": 0.0,
            "maneuver_kind": "none",
        },
        False,
        "Collision course, no errors and no target maneuver",
    ),
    "extended-ic": Preset(
        {
            "range_km": (50.0, 75.0),
            "missile_speed": (3000.0, 3500.0),
            "target_speed": (3000.0, 4000.0),
            "theta_deg": (-20.0, 20.0),
            "phi_deg": (-20.0, 20.0),
            "beta_deg": (-15.0, 15.0),
            "alpha_deg": (-15.0, 15.0),
        },
        False,
        "Initial conditions beyond the training ranges",
    ),
}


def apply_preset(config: RunConfig, name: str) -> RunConfig:
    """Copy of ``config`` with the named scenario preset applied

    Raises:
        ConfigurationError: If the preset name is unknown
    """
    if name not in PRESETS:
        raise ConfigurationError(
            f"Unknown preset '{name}' (choose from {', '.join(PRESET_NAMES)})"
        )
    preset = PRESETS[name]
    scenario = config.scenario.model_validate(
        {**config.scenario.model_dump(), **preset.scenario}
    )
    campaign = config.campaign.model_copy(
        update={"preset": name, "fixed_worst_case": preset.fixed_worst_case}
    )
    return config.model_copy(update={"scenario": scenario, "campaign": campaign})
