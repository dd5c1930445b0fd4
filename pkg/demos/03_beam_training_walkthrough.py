"""One beam-training episode, stage by stage.

Runs the four-stage descent on a noiseless desk scene and prints which
cells were probed, their delay-spectrum peaks, and the winner per stage,
then refines and compares the direction estimate with the truth.
"""

from irs_sense.beam_training import (beam_refinement, direction_error,
                                     direction_from_beam, hbt_3d)
from irs_sense.codebook import steer_to_direction
from irs_sense.config import ScenarioConfig
from irs_sense.detection import delay_spectrum, dsp_statistic
from irs_sense.harness import draw_target, shared_codebook
from irs_sense.ofdm import EchoSimulator

cfg = ScenarioConfig(m=16, n_sc=64, n_q=64, t_cg=24, t_fg=8, n_r=4, t_v=4,
                     iters=1, noise_power_dbm=float("-inf"), pl_d0_db=0.0,
                     target_u=0.317, target_v=-0.242)
wave = cfg.waveform()
geometry, target = draw_target(cfg, seed=0)
sim = EchoSimulator(wave, cfg.array(), cfg.path_model(),
                    [(geometry, target)], seed=0)
incident = (geometry.u_b2r_a, geometry.v_b2r_a)
book = shared_codebook(cfg.m)


def measure(codeword, symbol):
    xi = steer_to_direction(codeword.phases, incident)
    row, srow = sim.probe(xi, symbol)
    return dsp_statistic(
        delay_spectrum(row, srow, sim.tau_0, wave.delta_f, cfg.n_q))[0]


print(f"truth: u = {geometry.u_r2g_d:+.4f}, v = {geometry.v_r2g_d:+.4f}")
trace = hbt_3d(book, measure)
for stage in trace.stages:
    cells = "  ".join(f"({i},{j}) {p:9.3e}" for (i, j), p
                      in zip(stage.tested, stage.statistics))
    print(f"stage {stage.layer}: {cells}  -> winner {stage.winner}")

trace = beam_refinement(trace, book, measure)
coarse = direction_from_beam(*trace.final_ij, cfg.m)
fine = direction_from_beam(*trace.refined_ij, cfg.m)
print(f"winning cell {trace.final_ij} -> coarse (u, v) = "
      f"({coarse.u_hat:+.4f}, {coarse.v_hat:+.4f})")
print(f"refined indices ({trace.refined_ij[0]:.3f}, {trace.refined_ij[1]:.3f})"
      f" -> (u, v) = ({fine.u_hat:+.4f}, {fine.v_hat:+.4f})")
print(f"direction error: coarse "
      f"{direction_error(geometry.u_r2g_d, geometry.v_r2g_d, coarse):.5f} rad, "
      f"refined {direction_error(geometry.u_r2g_d, geometry.v_r2g_d, fine):.5f} rad")
print(f"symbols spent: {trace.symbols_used}")
