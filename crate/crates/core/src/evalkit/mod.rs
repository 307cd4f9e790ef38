//! Evaluation: PSNR/SSIM, interpolation baselines, benchmark tables with the
//! published reference numbers, and dependence statistics for learned
//! features.

mod dependence;
mod features;
mod interp;
mod metrics;
mod report;

pub use dependence::{distance_correlation, hsic_test, HsicResult};
pub use features::{feature_analysis, neighbourhood_means, FeatureAnalysisReport, K_GRID};
pub use interp::{cubic_weight, upscale_bicubic, upscale_bilinear, upscale_nearest, BICUBIC_A};
pub use metrics::{psnr, ssim, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
pub use report::{
    benchmark, emit_table, paper_reference, Baseline, MetricRow, MetricsReport, PaperRow, PAPER_REFERENCE, PSNR_CAP_DB,
};
