"""Frequency-domain bootstrap for spectral means and ratio statistics."""

from ._fdboot import (
    Bootstrap,
    cv_bandwidth,
    d1_distance,
    fit_ar,
    integrated_ratio_statistic,
    integrated_spectral_mean,
    periodogram,
    preset_configs,
    ratio_statistic,
    run_experiment,
    select_block_length,
    simulate,
    spectral_estimate,
    spectral_mean,
)

__all__ = [
    "Bootstrap",
    "cv_bandwidth",
    "d1_distance",
    "fit_ar",
    "integrated_ratio_statistic",
    "integrated_spectral_mean",
    "periodogram",
    "preset_configs",
    "ratio_statistic",
    "run_experiment",
    "select_block_length",
    "simulate",
    "spectral_estimate",
    "spectral_mean",
]
