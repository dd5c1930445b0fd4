"""IRS-assisted NLOS target sensing toolkit.

A DFBS illuminates an intelligent reflecting surface with OFDM symbols and
senses a non-line-of-sight target from the IRS-reshaped echoes: a
hierarchical codebook steers the surface, a delay-spectrum-peak detector
drives the beam descent, and a zooming delay-Doppler search recovers range
and velocity, from which the target is localized.
"""

from .channel import (C, ArrayConfig, PathModel, ScenarioGeometry, TargetState,
                      cascade_gain, channel_b2r, channel_r2g, path_gain,
                      steering_ula, steering_upa)
from .codebook import (Codeword, HierarchicalCodebook, beam_gain,
                       build_codebook, codeword_even_layer, codeword_narrow,
                       codeword_odd_layer, gain_map, optimal_beam,
                       steer_to_direction)
from .config import ConfigError, ScenarioConfig, load_config
from .crlb import (CrlbReport, DegenerateGeometryError, crlb_direction,
                   crlb_rv, fim_direction, snr_fg)
from .beam_training import (DirectionEstimate, TrainingTrace, beam_refinement,
                            direction_error, direction_from_beam, hbt_3d,
                            training_budget)
from .delay_doppler import (DDGrids, LocalizationInfeasibleError,
                            LocationEstimate, RvEstimate, auxiliary_matrix,
                            dd_spectrum, h_rve, initial_grids, localize,
                            rv_convert)
from .detection import (DelaySpectrum, DetectorConfig, delay_spectrum, detect,
                        dsp_statistic, far_threshold, rss_statistic)
from .harness import (TrialResult, aggregate, run_multi_trial, run_trial,
                      run_trials, sweep)
from .multi_target import (MultiScene, multi_fgs_schedule, multi_hbt,
                           normalized_delay_spectrum)
from .ofdm import (EchoGrid, EchoSimulator, SymbolGrid, WaveformConfig,
                   dfbs_beamformers, gen_symbols, simulate_echo)

__version__ = "0.1.0"
