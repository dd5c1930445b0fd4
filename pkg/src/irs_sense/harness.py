"""Monte Carlo orchestration: single trials, sweeps, metrics, CSV/JSON export.

A trial executes the full sensing strategy in protocol order: codebook
initialization, threshold calibration, coarse-grained beam training with
refinement, fine-grained delay-Doppler estimation with the refined beam,
range/velocity conversion, and localization. Every random quantity derives
from (master seed, trial seed) counter-based streams, so results are
independent of execution order and worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import ofdm
from .beam_training import (beam_refinement, direction_error,
                            direction_from_beam, hbt_3d)
from .channel import C, ScenarioGeometry, TargetState, steering_upa
from .codebook import HierarchicalCodebook, steer_to_direction
from .config import ConfigError, ScenarioConfig
from .crlb import crlb_direction, crlb_rv, fim_direction, nuisance_gain, snr_fg
from .delay_doppler import (LocalizationInfeasibleError, auxiliary_matrix,
                            h_rve, localize)
from .detection import delay_spectrum, dsp_statistic, far_threshold, rss_statistic
from .multi_target import multi_fgs_schedule, multi_hbt

_CODEBOOKS: dict[int, HierarchicalCodebook] = {}


def shared_codebook(m: int) -> HierarchicalCodebook:
    """Process-wide codebook cache; construction is lazy per codeword."""
    book = _CODEBOOKS.get(m)
    if book is None:
        book = _CODEBOOKS.setdefault(m, HierarchicalCodebook(m))
    return book


@dataclass(frozen=True)
class TrialResult:
    seed: int
    scheme: str
    detected: bool | None
    cell: tuple[int, int] | None
    cell_success: bool | None
    u_hat: float | None
    v_hat: float | None
    range_hat: float | None
    velocity_hat: float | None
    location: tuple[float, float, float] | None
    eps_dr: float | None
    eps_d: float | None
    eps_v: float | None
    eps_l: float | None
    truth: dict | None
    symbols_used: int
    failure: str | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_report(self) -> dict:
        """External JSON shape: documented key names plus trial context."""
        d = self.to_dict()
        d["range_m"] = d.pop("range_hat")
        d["velocity_mps"] = d.pop("velocity_hat")
        return d


def draw_target(config: ScenarioConfig, seed: int,
                index: int = 0) -> tuple[ScenarioGeometry, TargetState]:
    """Per-trial target draw: direction uniform in the configured bounds."""
    rng = ofdm.stream(seed, index, ofdm._TAG_SCENE)
    lo, hi = config.target_bounds
    u = config.target_u if config.target_u is not None else rng.uniform(lo, hi)
    v = config.target_v if config.target_v is not None else rng.uniform(lo, hi)
    geometry = ScenarioGeometry.from_direction(config.q_b, config.q_irs, u, v,
                                               config.target_range)
    target = TargetState.draw(config.target_velocity, config.rcs_variance,
                              config.wavelength, rng)
    return geometry, target


def _measure_factory(sim: ofdm.EchoSimulator, config: ScenarioConfig,
                     incident: tuple[float, float], scheme: str):
    """Per-beam statistic closure used by the training loop."""
    wave = sim.wave

    def measure(codeword, symbol):
        xi = steer_to_direction(codeword.phases, incident)
        row, srow = sim.probe(xi, symbol)
        if scheme == "rss":
            return rss_statistic(row)
        spec = delay_spectrum(row, srow, sim.tau_0, wave.delta_f, config.n_q)
        return dsp_statistic(spec)[0]

    return measure


def run_trial(config: ScenarioConfig, seed: int, scheme: str = "dsp",
              refine: bool = True, artifacts: dict | None = None) -> TrialResult:
    """One full coarse-plus-fine sensing episode; deterministic per seed.

    Passing a dict as ``artifacts`` captures debugging payloads under the
    keys "trace" (the training trace) and "fgs_grid" (the fine-grained echo
    grid).
    """
    if scheme not in ("dsp", "rss"):
        raise ValueError(f"unknown scheme {scheme!r}")
    wave = config.waveform()
    array = config.array()
    path_model = config.path_model()
    book = shared_codebook(config.m)

    geometry, target = draw_target(config, seed)
    targets = [] if config.target_absent else [(geometry, target)]
    sim = ofdm.EchoSimulator(wave, array, path_model, targets, seed,
                             geometry0=geometry)
    incident = (geometry.u_b2r_a, geometry.v_b2r_a)
    threshold = (far_threshold(config.far_target, wave.noise_power, config.n_q)
                 if scheme == "dsp" else None)

    measure = _measure_factory(sim, config, incident, scheme)
    trace = hbt_3d(book, measure, threshold)
    if refine:
        trace = beam_refinement(trace, book, measure)
        i_ref, j_ref = trace.refined_ij
    else:
        i_ref, j_ref = trace.final_ij
    est = direction_from_beam(i_ref, j_ref, config.m)

    truth = None
    cell_success = None
    eps_dr = None
    if not config.target_absent:
        truth = {"u": float(geometry.u_r2g_d), "v": float(geometry.v_r2g_d),
                 "range": float(geometry.d_r2g), "velocity": target.velocity}
        half = 1.0 / config.m
        cu = (2.0 * trace.final_ij[0] - 1.0) / config.m - 1.0
        cv = (2.0 * trace.final_ij[1] - 1.0) / config.m - 1.0
        cell_success = bool(abs(geometry.u_r2g_d - cu) <= half
                            and abs(geometry.v_r2g_d - cv) <= half)
        eps_dr = direction_error(geometry.u_r2g_d, geometry.v_r2g_d, est)

    # Fine-grained period: hold the refined beam for the whole block.
    xi_code = (trace.xi_refined if refine
               else book.codeword(book.n_layers, *trace.final_ij).phases)
    xi_fg = steer_to_direction(xi_code, incident)
    grid = sim.grid(np.broadcast_to(xi_fg, (config.t_fg, xi_fg.size)),
                    start_symbol=config.t_cg)
    f_mat = auxiliary_matrix(grid.y, grid.symbols, sim.tau_0, wave.delta_f)
    rv = h_rve(f_mat, wave, config.n_r, config.t_v, config.iters)
    if artifacts is not None:
        artifacts["trace"] = trace
        artifacts["fgs_grid"] = grid

    location = None
    eps_l = None
    failure = None
    try:
        loc = localize(est.u_hat, est.v_hat, rv.range_hat, np.asarray(config.q_irs))
        location = tuple(float(x) for x in loc.q_hat)
        if truth is not None:
            eps_l = float(np.linalg.norm(loc.q_hat - geometry.q_g))
    except LocalizationInfeasibleError as exc:
        failure = f"localization: {exc}"

    eps_d = abs(rv.range_hat - geometry.d_r2g) if truth else None
    eps_v = abs(rv.velocity_hat - target.velocity) if truth else None
    return TrialResult(
        seed=seed, scheme=scheme, detected=trace.detected,
        cell=trace.final_ij, cell_success=cell_success,
        u_hat=est.u_hat, v_hat=est.v_hat,
        range_hat=rv.range_hat, velocity_hat=rv.velocity_hat,
        location=location, eps_dr=eps_dr, eps_d=eps_d, eps_v=eps_v,
        eps_l=eps_l, truth=truth,
        symbols_used=trace.symbols_used + config.t_fg, failure=failure)


def draw_multi_targets(config: ScenarioConfig, seed: int, n_targets: int):
    """Well-separated target draws: bottom-layer cells at least two apart,
    distinct delay bins, and directions clear of cell boundaries (boundary
    or adjacent-cell targets split their energy across cells and are not
    attributable to a single area)."""
    targets = []
    cells = set()
    bins = set()
    attempt = 0
    cell_w = 2.0 / config.m
    while len(targets) < n_targets:
        rng = ofdm.stream(seed, attempt, ofdm._TAG_SCENE)
        attempt += 1
        if attempt > 500:
            raise RuntimeError("could not place well-separated targets")
        lo, hi = config.target_bounds
        u, v = rng.uniform(lo, hi), rng.uniform(lo, hi)
        off_u = ((u + 1.0) % cell_w) / cell_w
        off_v = ((v + 1.0) % cell_w) / cell_w
        if min(off_u, 1 - off_u, off_v, 1 - off_v) < 0.2:
            continue
        cell = (int((u + 1.0) * config.m / 2.0), int((v + 1.0) * config.m / 2.0))
        rng_m = rng.uniform(0.5, 1.0) * config.target_range
        dbin = int(2.0 * rng_m / C * config.n_q * config.delta_f)
        if any(max(abs(cell[0] - c[0]), abs(cell[1] - c[1])) < 2 for c in cells):
            continue
        # distinct delay bins only when the grid can resolve the range
        # spread at all; a coarse grid maps every draw to the same bin
        resolvable = C / (2.0 * config.n_q * config.delta_f) \
            < 0.25 * config.target_range
        if resolvable and dbin in bins:
            continue
        cells.add(cell)
        bins.add(dbin)
        geometry = ScenarioGeometry.from_direction(config.q_b, config.q_irs,
                                                   u, v, rng_m)
        target = TargetState.draw(config.target_velocity, config.rcs_variance,
                                  config.wavelength, rng)
        targets.append((geometry, target))
    return targets


def run_multi_trial(config: ScenarioConfig, seed: int, n_targets: int,
                    targets=None) -> list[TrialResult]:
    """Sequential multi-target episode: shared training, per-beam FGS blocks.

    The distance-normalized ranking weights a spectrum peak by its own
    cell's range, and the zero-delay cell weighs exactly zero; a grid too
    coarse to resolve the target ranges therefore zeroes out every true
    cell. The delay grid must put the configured ranges beyond cell zero
    with margin.
    """
    if n_targets > 1:
        bin_m = C / (2.0 * config.n_q * config.delta_f)
        if bin_m > 0.25 * config.target_range:
            need = math.ceil(C / (0.5 * config.target_range * config.delta_f))
            raise ConfigError(
                "multi-target ranking needs a delay grid finer than a quarter"
                f" of the target range: cell is {bin_m:.1f} m at n_q="
                f"{config.n_q}; raise n_q to at least {need}")
    wave = config.waveform()
    array = config.array()
    path_model = config.path_model()
    book = shared_codebook(config.m)
    if targets is None:
        targets = draw_multi_targets(config, seed, n_targets)
    sim = ofdm.EchoSimulator(wave, array, path_model, targets, seed)
    incident = (targets[0][0].u_b2r_a, targets[0][0].v_b2r_a)
    threshold = far_threshold(config.far_target, wave.noise_power, config.n_q)

    def measure_spectrum(codeword, symbol):
        xi = steer_to_direction(codeword.phases, incident)
        row, srow = sim.probe(xi, symbol)
        return delay_spectrum(row, srow, sim.tau_0, wave.delta_f, config.n_q)

    result = multi_hbt(book, measure_spectrum, threshold, n_targets,
                       config.eps_r2g)
    slices = multi_fgs_schedule(max(len(result.candidates), 1), config.t_fg)
    out = []
    for cand, block in zip(result.candidates, slices):
        est = direction_from_beam(*cand.refined_ij, config.m)
        xi_fg = steer_to_direction(cand.xi_refined, incident)
        n_block = block.stop - block.start
        grid = sim.grid(np.broadcast_to(xi_fg, (n_block, xi_fg.size)),
                        start_symbol=config.t_cg + block.start)
        f_mat = auxiliary_matrix(grid.y, grid.symbols, sim.tau_0, wave.delta_f)
        rv = h_rve(f_mat, wave, config.n_r, config.t_v, config.iters)
        # score against the closest true target
        best = min(targets, key=lambda tg: abs(tg[0].u_r2g_d - est.u_hat)
                   + abs(tg[0].v_r2g_d - est.v_hat))
        geometry, target = best
        location = None
        eps_l = None
        failure = None
        try:
            loc = localize(est.u_hat, est.v_hat, rv.range_hat,
                           np.asarray(config.q_irs))
            location = tuple(float(x) for x in loc.q_hat)
            eps_l = float(np.linalg.norm(loc.q_hat - geometry.q_g))
        except LocalizationInfeasibleError as exc:
            failure = f"localization: {exc}"
        half = 1.0 / config.m
        cell_u = (2 * cand.cell[0] - 1) / config.m - 1
        cell_v = (2 * cand.cell[1] - 1) / config.m - 1
        out.append(TrialResult(
            seed=seed, scheme="dsp", detected=not result.shortfall,
            cell=cand.cell,
            cell_success=bool(abs(geometry.u_r2g_d - cell_u) <= half
                              and abs(geometry.v_r2g_d - cell_v) <= half),
            u_hat=est.u_hat, v_hat=est.v_hat,
            range_hat=rv.range_hat, velocity_hat=rv.velocity_hat,
            location=location,
            eps_dr=direction_error(geometry.u_r2g_d, geometry.v_r2g_d, est),
            eps_d=abs(rv.range_hat - geometry.d_r2g),
            eps_v=abs(rv.velocity_hat - target.velocity),
            eps_l=eps_l,
            truth={"u": float(geometry.u_r2g_d), "v": float(geometry.v_r2g_d),
                   "range": float(geometry.d_r2g), "velocity": target.velocity},
            symbols_used=result.symbols_used + n_block, failure=failure))
    return out


# -- aggregation ---------------------------------------------------------

def _trial_job(args):
    config, seed, scheme, refine = args
    return run_trial(config, seed, scheme, refine)


def run_trials(config: ScenarioConfig, seeds, scheme: str = "dsp",
               refine: bool = True, workers: int | None = None) -> list[TrialResult]:
    """Run many trials; output order and values are independent of workers."""
    workers = config.workers if workers is None else workers
    jobs = [(config, int(s), scheme, refine) for s in seeds]
    if workers <= 1:
        results = [_trial_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_job, jobs))
    return sorted(results, key=lambda r: r.seed)


def _rate(flags) -> tuple[float, float]:
    flags = [bool(f) for f in flags]
    n = len(flags)
    p = sum(flags) / n if n else math.nan
    se = math.sqrt(p * (1.0 - p) / n) if n else math.nan
    return p, se


def _rmse(values) -> tuple[float, float]:
    vals = np.array([v for v in values if v is not None], dtype=float)
    if vals.size == 0:
        return math.nan, math.nan
    mse = float(np.mean(vals ** 2))
    rmse = math.sqrt(mse)
    if vals.size < 2 or rmse == 0.0:
        return rmse, 0.0
    se_mse = float(np.std(vals ** 2, ddof=1)) / math.sqrt(vals.size)
    return rmse, se_mse / (2.0 * rmse)


def aggregate(results: list[TrialResult]) -> dict:
    """Order-independent reduction of one batch of trials."""
    results = sorted(results, key=lambda r: r.seed)
    out = {"trials": len(results),
           "failures": sum(1 for r in results if r.failure)}
    ok = [r for r in results if r.failure is None]
    succ = [r.cell_success for r in ok if r.cell_success is not None]
    det = [r.detected for r in ok if r.detected is not None]
    out["success_rate"], out["success_rate_stderr"] = _rate(succ) if succ else (math.nan, math.nan)
    out["detection_rate"] = _rate(det)[0] if det else math.nan
    for name in ("eps_dr", "eps_d", "eps_v", "eps_l"):
        rmse, se = _rmse(getattr(r, name) for r in ok)
        out[f"{name}_rmse"] = rmse
        out[f"{name}_rmse_stderr"] = se
    return out


# -- parameter sweeps -----------------------------------------------------

def _axis_setter(config: ScenarioConfig, axis: str, value):
    axis_up = axis.upper()
    if axis_up == "N":
        kw = {"n_sc": int(value)}
        if config.n_q == config.n_sc:
            kw["n_q"] = int(value)
        return config.replace(**kw)
    if axis_up == "M":
        return config.replace(m=int(value))
    if axis_up == "NB":
        return config.replace(n_b=int(value))
    if axis_up == "T_FG":
        return config.replace(t_fg=int(value))
    if axis_up == "T_CG":
        return config.replace(t_cg=int(value))
    if axis_up == "N_Q":
        return config.replace(n_q=int(value))
    if axis_up in ("N_R", "T_V", "I"):
        key = {"N_R": "n_r", "T_V": "t_v", "I": "iters"}[axis_up]
        return config.replace(**{key: int(value)})
    if axis_up == "SNR_DB":
        return config.replace(noise_power_dbm=config.noise_power_dbm - float(value))
    raise ConfigError(f"unknown sweep axis {axis!r}")


_SWEEP_METRICS = ("success_rate", "success_rate_stderr", "detection_rate",
                  "eps_dr_rmse", "eps_dr_rmse_stderr", "eps_d_rmse",
                  "eps_d_rmse_stderr", "eps_v_rmse", "eps_v_rmse_stderr",
                  "eps_l_rmse", "eps_l_rmse_stderr", "trials", "failures")


def sweep_columns(schemes) -> list[str]:
    """Documented, stable header of a sweep table."""
    cols = ["axis", "value"]
    for s in schemes:
        cols.extend(f"{m}_{s}" for m in _SWEEP_METRICS)
    return cols


def sweep(config: ScenarioConfig, axis: str, values, trials: int | None = None,
          schemes=("dsp",), refine: bool = True, workers: int | None = None):
    """One row of aggregate metrics per (axis value); wide per-scheme columns."""
    trials = config.trials if trials is None else trials
    rows = []
    for value in values:
        cfg = _axis_setter(config, axis, value)
        row = {"axis": axis, "value": value}
        for scheme in schemes:
            seeds = range(config.master_seed, config.master_seed + trials)
            agg = aggregate(run_trials(cfg, seeds, scheme, refine, workers))
            for metric in _SWEEP_METRICS:
                row[f"{metric}_{scheme}"] = agg[metric]
        rows.append(row)
    return rows


def rows_to_csv(rows, columns, path_or_buf) -> None:
    """Write rows with an exact, documented header."""
    own = isinstance(path_or_buf, (str, bytes))
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in columns})
    finally:
        if own:
            fh.close()


def rows_to_json(rows, path_or_buf) -> None:
    own = isinstance(path_or_buf, (str, bytes))
    fh = open(path_or_buf, "w") if own else path_or_buf
    try:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    finally:
        if own:
            fh.close()


# -- detector calibration curves ------------------------------------------

def empirical_far(config: ScenarioConfig, far_target: float, trials: int,
                  seed: int = 0) -> float:
    """Fraction of noise-only probes whose spectrum peak clears the threshold."""
    wave = config.waveform()
    threshold = far_threshold(far_target, wave.noise_power, config.n_q)
    n = wave.n_sc
    taus = np.arange(config.n_q) / (config.n_q * wave.delta_f)
    kernel = np.exp(2j * np.pi * wave.delta_f * np.outer(taus, np.arange(n)))
    hits = 0
    for t in range(trials):
        z = ofdm.noise_row(wave, seed, t) / ofdm.symbol_row(wave, seed, t)
        peak = float(np.max(np.abs(kernel @ z) ** 2) / n)
        hits += peak > threshold
    return hits / trials


def detect_roc(config: ScenarioConfig, far_values, trials: int, seed: int = 0):
    """Rows of (far_target, empirical_far, empirical_detection_rate, snr_db)."""
    wave = config.waveform()
    array = config.array()
    path_model = config.path_model()
    rows = []
    geometry, target = draw_target(config, seed)
    incident = (geometry.u_b2r_a, geometry.v_b2r_a)
    xi = steer_to_direction(
        steering_upa(config.m, geometry.u_r2g_d, geometry.v_r2g_d), incident)
    sim = ofdm.EchoSimulator(wave, array, path_model, [(geometry, target)], seed)
    amp = ofdm.signal_amplitude(geometry, target, path_model, array, xi)
    snr_db = 10.0 * math.log10(wave.power_per_sc * amp ** 2 / wave.noise_power)
    for far in far_values:
        threshold = far_threshold(far, wave.noise_power, config.n_q)
        det = 0
        for t in range(trials):
            row, srow = sim.probe(xi, t)
            spec = delay_spectrum(row, srow, sim.tau_0, wave.delta_f, config.n_q)
            det += dsp_statistic(spec)[0] > threshold
        rows.append({"far_target": far,
                     "empirical_far": empirical_far(config, far, trials, seed + 1),
                     "empirical_detection_rate": det / trials,
                     "snr_db": snr_db})
    return rows


def crlb_sweep(config: ScenarioConfig, snr_db_values, seed: int = 0):
    """Bound curves vs FGS SNR for the configured scenario geometry.

    The direction bound aggregates the bottom-layer probe set actually
    spent on the target cell (winner plus the four axis neighbors); a
    single beam cannot identify direction and nuisance gain jointly.
    """
    wave = config.waveform()
    array = config.array()
    path_model = config.path_model()
    geometry, target = draw_target(config, seed)
    incident = (geometry.u_b2r_a, geometry.v_b2r_a)
    xi = steer_to_direction(
        steering_upa(config.m, geometry.u_r2g_d, geometry.v_r2g_d), incident)
    book = shared_codebook(config.m)
    i0 = min(max(int((geometry.u_r2g_d + 1.0) * config.m / 2.0) + 1, 2), config.m - 1)
    j0 = min(max(int((geometry.v_r2g_d + 1.0) * config.m / 2.0) + 1, 2), config.m - 1)
    probe_set = [steer_to_direction(book.codeword(book.n_layers, i, j).phases,
                                    incident)
                 for (i, j) in ((i0, j0), (i0 - 1, j0), (i0 + 1, j0),
                                (i0, j0 - 1), (i0, j0 + 1))]
    snr_unit_noise = snr_fg(
        dataclasses.replace(wave, noise_power=1.0), array, geometry,
        path_model, config.rcs_variance, xi)
    rows = []
    for snr_db in snr_db_values:
        snr = 10.0 ** (snr_db / 10.0)
        c_range, c_vel = crlb_rv(snr, config.n_sc, config.t_fg,
                                 config.delta_f, wave.t_o, config.f_c)
        noise = snr_unit_noise / snr
        wave_at = dataclasses.replace(wave, noise_power=noise)
        kappa = nuisance_gain(geometry, target, path_model, wave)
        fim = fim_direction(geometry, array, path_model, wave_at, probe_set,
                            kappa)
        cd = crlb_direction(fim)
        rows.append({"snr_db": snr_db, "crlb_range_m2": c_range,
                     "crlb_vel_mps2": c_vel,
                     "crlb_u": float(cd[0, 0]), "crlb_v": float(cd[1, 1])})
    return rows
