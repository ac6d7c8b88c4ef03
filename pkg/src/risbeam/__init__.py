"""Desk-scale beam-steering measurement campaigns, simulated end to end.

A reconfigurable reflecting array sits between a fixed feed antenna and a
receiver that walks around it on a turntable arc.  The package builds phase
codebooks for such an array, simulates received-power sweeps over beam and
rotation grids, and provides the downstream analyses those sweeps feed:
pattern smoothing, beamwidth extraction, scaling-law fits, angle-of-arrival
localization, 3D pattern reconstruction, and a small learned surrogate.
"""

from .array_model import (
    ArraySpec,
    Direction,
    PhaseConfig,
    element_phase_profile,
    ideal_config,
    quantization_loss,
    quantize_config,
    quantize_phases,
    received_signal,
    steering_vector,
    uniform_phase_set,
)
from .chamber import (
    ChamberGeometry,
    LinkBudget,
    SampleCountStudy,
    field_regions,
    rsrp,
    sample_count_study,
    sweep_absorption,
    sweep_beampattern,
)
from .codebook import (
    MODE_TX_COMPENSATED,
    MODE_UNCOMPENSATED,
    Codebook,
    CodebookGrid,
    absorption_masks,
    build_codebook,
    lookup,
    read_codebook,
    write_codebook,
)
from .analysis import (
    ExpFit,
    LocalizedColumn,
    Pattern3D,
    SgFilterSpec,
    fit_exponential,
    hpbw,
    hpi_reconstruct,
    localization_success_rate,
    localize_aoa,
    nmse,
    savitzky_golay,
)
from .config import CampaignConfig, load_campaign_config
from .datasets import (
    AbsorptionTable,
    BeampatternTable,
    load_column_mapping,
    read_absorption,
    read_beampattern,
    read_table,
    write_absorption,
    write_beampattern,
)
from .errors import (
    ConfigError,
    DomainError,
    FitDivergenceError,
    LobeTruncatedError,
    ModelFormatError,
    NotFoundError,
    ParseError,
)
from .surrogate import (
    MlpModel,
    MlpSpec,
    TrainSpec,
    flatten_table,
    gradient_check,
    load_model,
    save_model,
    split_records,
    train,
)

__all__ = [
    "ArraySpec",
    "Direction",
    "PhaseConfig",
    "element_phase_profile",
    "ideal_config",
    "quantization_loss",
    "quantize_config",
    "quantize_phases",
    "received_signal",
    "steering_vector",
    "uniform_phase_set",
    "ChamberGeometry",
    "LinkBudget",
    "SampleCountStudy",
    "field_regions",
    "rsrp",
    "sample_count_study",
    "sweep_absorption",
    "sweep_beampattern",
    "MODE_TX_COMPENSATED",
    "MODE_UNCOMPENSATED",
    "Codebook",
    "CodebookGrid",
    "absorption_masks",
    "build_codebook",
    "lookup",
    "read_codebook",
    "write_codebook",
    "ExpFit",
    "LocalizedColumn",
    "Pattern3D",
    "SgFilterSpec",
    "fit_exponential",
    "hpbw",
    "hpi_reconstruct",
    "localization_success_rate",
    "localize_aoa",
    "nmse",
    "savitzky_golay",
    "CampaignConfig",
    "load_campaign_config",
    "AbsorptionTable",
    "BeampatternTable",
    "load_column_mapping",
    "read_absorption",
    "read_beampattern",
    "read_table",
    "write_absorption",
    "write_beampattern",
    "ConfigError",
    "DomainError",
    "FitDivergenceError",
    "LobeTruncatedError",
    "ModelFormatError",
    "NotFoundError",
    "ParseError",
    "MlpModel",
    "MlpSpec",
    "TrainSpec",
    "flatten_table",
    "gradient_check",
    "load_model",
    "save_model",
    "split_records",
    "train",
]
