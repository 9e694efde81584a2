"""Link-level laboratory for spectrally shaped single-carrier multicarrier
waveforms: orthogonal baselines, compressed-spectrum variants, block-fading
channel emulation, and the measurement surface that compares them."""

from .errors import (
    CapacityError,
    ConfigurationError,
    CoverageError,
    DimensionError,
    FramingError,
    MappingError,
    OptimizationError,
    ParameterError,
)
from .numerics import (
    QamSymbolBlock,
    RandomStream,
    dft,
    draw_cgaussian,
    nearest_qam,
    qam_demap,
    qam_map,
)
from .shaping import (
    InterferenceProfile,
    OpCount,
    ShapingPair,
    build_nofst,
    export_pair,
    frame_cost,
    import_pair,
    interference_profile,
    refine_nofst,
    transform_cost,
)
from .airframe import (
    WAVEFORM_KINDS,
    FrameSignal,
    ResourceGrid,
    WaveformConfig,
    build_grid,
    demap_frame,
    map_and_modulate,
    nofs_modulate,
    occupied_bins,
    precode,
    read_frame,
    signed_freqs,
    write_frame,
)
from .channel import (
    SPEED_OF_LIGHT,
    ChannelRealization,
    MobilityFigures,
    PdpSpec,
    apply_channel,
    awgn,
    coherence_to_doppler,
    doppler_to_coherence,
    doppler_to_velocity,
    mobility_figures,
    pdp_preset,
    realize_channel,
    velocity_to_doppler,
)
from .link import (
    ChannelEstimate,
    DetectorKind,
    LinkPoint,
    LinkReport,
    deprecode_detect,
    equalize,
    estimate_channel,
    report_to_csv,
    run_link,
    wilson_interval,
)
from .bench import (
    CcdfCurve,
    PRESETS,
    PsdEstimate,
    ScenarioPreset,
    ccdf_threshold,
    efficiency_gain,
    format_manifest,
    get_preset,
    occupied_bandwidth,
    papr_ccdf,
    parse_scenario,
    preset_config,
    psd_welch,
    scenario_campaign,
    spectral_efficiency,
)
from .cli import cli_main

__version__ = "0.1.0"
