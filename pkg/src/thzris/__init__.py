"""Link-level simulation lab for graphene-RIS assisted terahertz MIMO.

Modules:
  graphene    - tunable element physics and the discrete phase codebook
  channel     - sparse geometric THz MIMO channel model
  beamforming - cascaded channel, SVD transceivers, achievable rate
  optimizer   - RIS phase optimization (adaptive/constant gradient descent,
                random and exhaustive baselines)
  harness     - seeded Monte-Carlo experiment sweeps and CSV output
  cli         - command-line front end
"""

from .beamforming import (BeamformerPair, ReflectionState, achievable_rate,
                          cascaded_channel, jensen_upper_bound, svd_beamformers)
from .channel import (ArrayGeometry, ChannelRealization, Hop, LinkGeometry,
                      PathParams, los_gain, nlos_gain, sample_channel,
                      upa_response)
from .graphene import (ElementGeometry, GrapheneParams, PhaseCodebook,
                       analytic_phase_response, build_codebook,
                       effective_permittivity, fermi_level_from_voltage,
                       surface_conductivity)
from .harness import (ConfigError, ExperimentConfig, SweepResult, emit_csv,
                      load_config, preset, preset_names, run_experiment)
from .optimizer import (GdTrace, OptimizerSettings, QuadraticForm,
                        adaptive_step, build_quadratic_form, gradient,
                        objective, quantize_phases, run_agd, run_cgd,
                        run_exhaustive, run_random_phase)

__version__ = "0.1.0"
