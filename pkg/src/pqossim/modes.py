"""Application modes: the discrete compression presets of the LiDAR uplink.

Each mode trades payload size against point-cloud fidelity. The simulator
never runs a compressor; a mode is fully described by its mean uplink
payload per frame and the chamfer distance its compression pipeline incurs
on a reference cloud.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ApplicationMode:
    """One compression preset of the uplink LiDAR stream.

    mode_id         -- numeric identifier of the preset
    mean_payload_kb -- mean compressed frame size in KB (1 KB = 1000 bytes)
    cd_sym          -- symmetric chamfer distance of the compressed cloud
                       against the raw acquisition (0 = lossless)
    """

    mode_id: int
    mean_payload_kb: float
    cd_sym: float

    def __post_init__(self) -> None:
        if self.mean_payload_kb <= 0:
            raise ValueError(f"mean_payload_kb must be > 0, got {self.mean_payload_kb}")
        if self.cd_sym < 0:
            raise ValueError(f"cd_sym must be >= 0, got {self.cd_sym}")


# Canonical presets: raw stream plus three compression/segmentation levels.
MODE_RAW = ApplicationMode(0, 3200.0, 0.0)
MODE_1450 = ApplicationMode(1450, 200.0, 0.000044)
MODE_1451 = ApplicationMode(1451, 104.0, 5.476881)
MODE_1452 = ApplicationMode(1452, 17.0, 35.634660)

CANONICAL_MODES = (MODE_RAW, MODE_1450, MODE_1451, MODE_1452)
MODES_BY_ID = {m.mode_id: m for m in CANONICAL_MODES}

# Action set of the learning agent. The raw mode is excluded: it exists only
# as a fixed baseline. Index order is part of the checkpoint contract.
AGENT_ACTION_MODES = (MODE_1450, MODE_1451, MODE_1452)
AGENT_ACTION_IDS = tuple(m.mode_id for m in AGENT_ACTION_MODES)


def mode_from_id(mode_id: int) -> ApplicationMode:
    """Look up a canonical mode; raises ValueError for unknown ids."""
    try:
        return MODES_BY_ID[mode_id]
    except KeyError:
        known = sorted(MODES_BY_ID)
        raise ValueError(f"unknown application mode {mode_id}; known: {known}") from None
