"""End-to-end orchestration: simulate, reconstruct, analyze, summarize.

All artifacts are flat text (CSV count tables, key=value reports with
matrix blocks) and are byte-reproducible for a fixed configuration and seed.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .chsh import ChshResult, chsh_s, chsh_sigma_resampled
from .config import ExperimentConfig
from .conversion import convert, convert_qubit, efficiency_budget, focusing_factor, source_state
from .counts import (CountRecord, expected_counts, expected_process_counts,
                     read_counts_csv, simulate_counts, simulate_process_counts,
                     stage_seed, write_counts_csv)
from .reference import REFERENCE_VALUES
from .reports import emit_keyvalues, emit_report
from .states import MetricReport, bell_state, fidelity, purity, tangle, werner_state
from .tomography import (MonteCarloErrors, TomographyOptions, TomographyResult,
                         identity_chi, mle_process, mle_state, monte_carlo_errors,
                         process_fidelity, process_purity, subtract_accidentals,
                         tomography_settings)

COUNT_FILES = {
    "state_input": "counts_state_input.csv",
    "state_output": "counts_state_output.csv",
    "process": "counts_process.csv",
    "chsh": "counts_chsh.csv",
}


def _mc_seed(config: ExperimentConfig, index: int) -> int:
    ss = np.random.SeedSequence(entropy=stage_seed(config.seed, "monte_carlo"),
                                spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def run_simulate(config: ExperimentConfig, outdir: str | Path) -> dict[str, Path]:
    """Generate the four count tables for one simulated run.

    With ``config.noiseless`` every count is set to its expectation instead
    of being Poisson-sampled, which closes reconstruction loops exactly.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rho_src = source_state(config.source)
    rho_conv, _ = convert(rho_src, config.conversion)
    settings36 = tomography_settings("state2q")

    def pair_stage(rho, det, duration, stage):
        if config.noiseless:
            return expected_counts(rho, settings36, config.source, det, duration)
        return simulate_counts(rho, settings36, config.source, det, duration,
                               stage_seed(config.seed, stage))

    paths = {}
    paths["state_input"] = outdir / COUNT_FILES["state_input"]
    write_counts_csv(paths["state_input"],
                     pair_stage(rho_src, config.detection["input"],
                                config.acquisition.input_duration, "state_input"))

    paths["state_output"] = outdir / COUNT_FILES["state_output"]
    write_counts_csv(paths["state_output"],
                     pair_stage(rho_conv, config.detection["output"],
                                config.acquisition.output_duration, "state_output"))

    channel = config.process.channel
    if config.noiseless:
        records = expected_process_counts(lambda r: convert_qubit(r, channel),
                                          tomography_settings("process1q"),
                                          config.process.rate,
                                          config.acquisition.process_duration,
                                          accidental_rate=config.process.accidental_rate)
    else:
        records = simulate_process_counts(lambda r: convert_qubit(r, channel),
                                          tomography_settings("process1q"),
                                          config.process.rate,
                                          config.acquisition.process_duration,
                                          stage_seed(config.seed, "process"),
                                          accidental_rate=config.process.accidental_rate)
    paths["process"] = outdir / COUNT_FILES["process"]
    write_counts_csv(paths["process"], records)

    rho_bell = werner_state(config.chsh_source_p)
    chsh_settings = [(repr(a), repr(b)) for a, b in config.chsh.measurement_angles()]
    if config.noiseless:
        records = expected_counts(rho_bell, chsh_settings, config.source,
                                  config.detection["chsh"],
                                  config.acquisition.chsh_duration)
    else:
        records = simulate_counts(rho_bell, chsh_settings, config.source,
                                  config.detection["chsh"],
                                  config.acquisition.chsh_duration,
                                  stage_seed(config.seed, "chsh"))
    paths["chsh"] = outdir / COUNT_FILES["chsh"]
    write_counts_csv(paths["chsh"], records)
    return paths


def state_metrics_with_errors(records: list[CountRecord], options: TomographyOptions,
                              subtract: bool, mc_samples: int,
                              seed: int) -> tuple[TomographyResult, MonteCarloErrors]:
    """MLE reconstruction plus Monte-Carlo std-errors on F, P and T."""
    prepared = subtract_accidentals(records) if subtract else records
    result = mle_state(prepared, options)
    target = options.fidelity_target if options.fidelity_target is not None \
        else bell_state("phi+")

    def reconstructor(recs):
        data = subtract_accidentals(recs) if subtract else recs
        return mle_state(data, options).estimate

    mc = monte_carlo_errors(records, reconstructor,
                            {"fidelity": lambda m: fidelity(m, target),
                             "purity": purity, "tangle": tangle},
                            mc_samples, seed)
    result.metrics = MetricReport(
        fidelity=result.metrics.fidelity, purity=result.metrics.purity,
        tangle=result.metrics.tangle, fidelity_err=mc.std_errors["fidelity"],
        purity_err=mc.std_errors["purity"], tangle_err=mc.std_errors["tangle"])
    return result, mc


def process_metrics_with_errors(records: list[CountRecord], options: TomographyOptions,
                                mc_samples: int,
                                seed: int) -> tuple[TomographyResult, MonteCarloErrors]:
    """Process reconstruction plus Monte-Carlo std-errors on F and P."""
    result = mle_process(records, options)
    ideal = options.process_ideal if options.process_ideal is not None else identity_chi()

    def reconstructor(recs):
        return mle_process(recs, options).estimate

    mc = monte_carlo_errors(records, reconstructor,
                            {"fidelity": lambda m: process_fidelity(m, ideal),
                             "purity": process_purity},
                            mc_samples, seed)
    result.metrics = MetricReport(
        fidelity=result.metrics.fidelity, purity=result.metrics.purity, tangle=None,
        fidelity_err=mc.std_errors["fidelity"], purity_err=mc.std_errors["purity"])
    return result, mc


def _state_report(result: TomographyResult, label: str) -> str:
    m = result.metrics
    items = {
        "kind": result.kind, "label": label, "converged": result.converged,
        "iterations": result.iterations, "log_likelihood": result.log_likelihood,
        "fidelity": m.fidelity, "fidelity_err": m.fidelity_err,
        "purity": m.purity, "purity_err": m.purity_err,
    }
    if m.tangle is not None:
        items["tangle"] = m.tangle
        items["tangle_err"] = m.tangle_err
    return emit_report(items, result.estimate)


def run_reconstruct_state(config: ExperimentConfig, outdir: str | Path,
                          counts_path: str | Path, label: str,
                          subtract: bool = True,
                          mc_samples: int | None = None) -> TomographyResult:
    """Reconstruct a two-qubit state from a count CSV and write its report."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    records = read_counts_csv(counts_path)
    n = mc_samples if mc_samples is not None else config.mc_samples
    result, _ = state_metrics_with_errors(records, config.tomography, subtract,
                                          n, _mc_seed(config, 0))
    (outdir / f"state_{label}.txt").write_text(_state_report(result, label))
    return result


def run_reconstruct_process(config: ExperimentConfig, outdir: str | Path,
                            counts_path: str | Path,
                            mc_samples: int | None = None) -> TomographyResult:
    """Reconstruct the conversion process from a count CSV and write its report."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    records = read_counts_csv(counts_path)
    n = mc_samples if mc_samples is not None else config.mc_samples
    result, _ = process_metrics_with_errors(records, config.tomography, n,
                                            _mc_seed(config, 1))
    (outdir / "process_chi.txt").write_text(_state_report(result, "process"))
    return result


def run_chsh(config: ExperimentConfig, outdir: str | Path,
             counts_path: str | Path) -> ChshResult:
    """Evaluate the CHSH parameter from a 16-record count CSV."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    records = read_counts_csv(counts_path)
    result = chsh_s(config.chsh, records)
    sigma_mc = chsh_sigma_resampled(config.chsh, records, n_samples=200,
                                    seed=_mc_seed(config, 2))
    items = {
        "s_value": result.s_value, "s_sigma": result.s_sigma,
        "s_sigma_resampled": sigma_mc,
        "correlation_ab": result.correlations[0],
        "correlation_ab_prime": result.correlations[1],
        "correlation_a_prime_b": result.correlations[2],
        "correlation_a_prime_b_prime": result.correlations[3],
    }
    (outdir / "chsh.txt").write_text(emit_keyvalues(items))
    return result


def run_efficiency(config: ExperimentConfig, outdir: str | Path) -> dict[str, float]:
    """Evaluate the conversion-efficiency budget and write its report."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    budget = efficiency_budget(config.efficiency)
    xi = 0.8
    budget["focusing_factor_xi"] = xi
    budget["focusing_factor"] = focusing_factor(xi)
    (outdir / "efficiency.txt").write_text(emit_keyvalues(budget))
    return budget


_SUMMARY_KEYS = (
    "chsh_s", "chsh_s_sigma",
    "fidelity_input_raw", "fidelity_input_corrected",
    "fidelity_output_raw", "tangle_output_raw",
    "fidelity_output_corrected", "purity_output_corrected", "tangle_output_corrected",
    "process_fidelity", "process_purity",
    "observed_photon_conversion", "intrinsic_pair_conversion",
    "theory_single_crystal_efficiency",
)


def run_report(config: ExperimentConfig, outdir: str | Path) -> dict[str, float]:
    """Full pipeline: simulate, reconstruct everything, compare to references.

    The summary lists each simulated quantity next to the published value it
    models; the references are labels, not fit targets.
    """
    outdir = Path(outdir)
    paths = run_simulate(config, outdir)
    opts = config.tomography
    n = config.mc_samples

    in_records = read_counts_csv(paths["state_input"])
    out_records = read_counts_csv(paths["state_output"])
    in_raw, _ = state_metrics_with_errors(in_records, opts, False, n, _mc_seed(config, 3))
    in_cor, _ = state_metrics_with_errors(in_records, opts, True, n, _mc_seed(config, 4))
    out_raw, _ = state_metrics_with_errors(out_records, opts, False, n, _mc_seed(config, 5))
    out_cor, _ = state_metrics_with_errors(out_records, opts, True, n, _mc_seed(config, 6))
    (outdir / "state_input_raw.txt").write_text(_state_report(in_raw, "input_raw"))
    (outdir / "state_input.txt").write_text(_state_report(in_cor, "input_corrected"))
    (outdir / "state_output_raw.txt").write_text(_state_report(out_raw, "output_raw"))
    (outdir / "state_output.txt").write_text(_state_report(out_cor, "output_corrected"))

    proc = run_reconstruct_process(config, outdir, paths["process"])
    bell = run_chsh(config, outdir, paths["chsh"])
    budget = run_efficiency(config, outdir)

    values = {
        "chsh_s": bell.s_value,
        "chsh_s_sigma": bell.s_sigma,
        "fidelity_input_raw": in_raw.metrics.fidelity,
        "fidelity_input_corrected": in_cor.metrics.fidelity,
        "fidelity_output_raw": out_raw.metrics.fidelity,
        "tangle_output_raw": out_raw.metrics.tangle,
        "fidelity_output_corrected": out_cor.metrics.fidelity,
        "purity_output_corrected": out_cor.metrics.purity,
        "tangle_output_corrected": out_cor.metrics.tangle,
        "process_fidelity": proc.metrics.fidelity,
        "process_purity": proc.metrics.purity,
        "observed_photon_conversion": budget["photon_conversion_observed"],
        "intrinsic_pair_conversion": budget["pair_conversion_intrinsic"],
        "theory_single_crystal_efficiency": budget["theory_single_crystal"],
    }
    converged = all(r.converged for r in (in_raw, in_cor, out_raw, out_cor, proc))
    items: dict[str, object] = {"all_reconstructions_converged": converged}
    for key in _SUMMARY_KEYS:
        items[key] = values[key]
        items[key + "_ref"] = float(REFERENCE_VALUES[key])
    (outdir / "summary.txt").write_text(emit_keyvalues(items))
    if not converged:
        raise RuntimeError("at least one reconstruction did not converge")
    return values
