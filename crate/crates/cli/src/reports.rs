//! CSV shaping for the experiment reports. Success rates are reported in
//! percent, matching the units of the reference tables; `avg_pts` stays a
//! plain count.

use crate::harness::{
    AuxCell, CompareCell, ConnectivityCell, ConvergenceCell, ConvergenceDensityCell, MeanStd,
    ObfuscatedCell, TransferCell,
};
use crate::io::fmt_f64;

fn pct(stats: &MeanStd) -> (String, String) {
    (fmt_f64(100.0 * stats.mean), fmt_f64(100.0 * stats.std))
}

fn opt_pct(stats: &Option<MeanStd>) -> (String, String) {
    match stats {
        Some(s) => pct(s),
        None => ("NA".into(), "NA".into()),
    }
}

pub const CONNECTIVITY_HEADER: [&str; 13] = [
    "setting", "norm", "method", "cases", "skipped", "asr1_mean", "asr1_std", "asr2_mean",
    "asr2_std", "asr_both_mean", "asr_both_std", "asr_avg_mean", "asr_avg_std",
];

pub fn connectivity_rows(cells: &[ConnectivityCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            let (a1m, a1s) = opt_pct(&c.asr1);
            let (a2m, a2s) = opt_pct(&c.asr2);
            let (bm, bs) = pct(&c.asr_both);
            let (am, avs) = pct(&c.asr_avg);
            vec![
                c.setting.clone(),
                c.norm.clone(),
                c.method.clone(),
                c.cases_used.to_string(),
                c.skipped.to_string(),
                a1m,
                a1s,
                a2m,
                a2s,
                bm,
                bs,
                am,
                avs,
            ]
        })
        .collect()
}

pub const TRANSFER_HEADER: [&str; 12] = [
    "setting", "norm", "curves", "skipped", "endp_avg_mean", "endp_avg_std", "path_succ_mean",
    "path_succ_std", "imgs_resc_mean", "imgs_resc_std", "avg_pts_mean", "avg_pts_std",
];

pub fn transfer_rows(cells: &[TransferCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            let (em, es) = pct(&c.endp_avg);
            let (pm, ps) = pct(&c.path_succ);
            let (rm, rs) = pct(&c.imgs_resc);
            vec![
                c.setting.clone(),
                c.norm.clone(),
                c.curves_used.to_string(),
                c.skipped.to_string(),
                em,
                es,
                pm,
                ps,
                rm,
                rs,
                fmt_f64(c.avg_pts.mean),
                fmt_f64(c.avg_pts.std),
            ]
        })
        .collect()
}

pub const AUX_HEADER: [&str; 10] = [
    "setting", "norm", "aux", "endp_avg_mean", "endp_avg_std", "path_succ_mean", "path_succ_std",
    "imp", "rescue_mean", "rescue_std",
];

pub fn aux_rows(cells: &[AuxCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            let (em, es) = pct(&c.endp_avg);
            let (pm, ps) = pct(&c.path_succ);
            let (rm, rs) = pct(&c.rescue);
            vec![
                c.setting.clone(),
                c.norm.clone(),
                c.aux.to_string(),
                em,
                es,
                pm,
                ps,
                fmt_f64(100.0 * c.imp),
                rm,
                rs,
            ]
        })
        .collect()
}

pub const CONVERGENCE_HEADER: [&str; 5] = ["setting", "aux", "epochs", "coverage_mean", "coverage_std"];

pub fn convergence_rows(cells: &[ConvergenceCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            let (cm, cs) = pct(&c.coverage);
            vec![c.setting.clone(), c.aux.to_string(), c.epochs.to_string(), cm, cs]
        })
        .collect()
}

pub const DENSITY_HEADER: [&str; 5] =
    ["setting", "aux", "points", "coverage_per_point_mean", "coverage_per_point_std"];

pub fn density_rows(cells: &[ConvergenceDensityCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            let (cm, cs) = pct(&c.coverage_per_point);
            vec![c.setting.clone(), c.aux.to_string(), c.points.to_string(), cm, cs]
        })
        .collect()
}

pub const COMPARE_HEADER: [&str; 10] = [
    "norm", "method", "attacked", "succ_rate", "avg_gen_mean", "avg_gen_std", "avg_forwards_mean",
    "avg_forwards_std", "avg_backwards_mean", "avg_backwards_std",
];

pub fn compare_rows(cells: &[CompareCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            vec![
                c.norm.clone(),
                c.method.clone(),
                c.attacked.to_string(),
                fmt_f64(c.succ_rate),
                fmt_f64(c.avg_gen.mean),
                fmt_f64(c.avg_gen.std),
                fmt_f64(c.avg_forwards.mean),
                fmt_f64(c.avg_forwards.std),
                fmt_f64(c.avg_backwards.mean),
                fmt_f64(c.avg_backwards.std),
            ]
        })
        .collect()
}

pub const OBFUSCATED_HEADER: [&str; 5] = ["method", "levels", "attacked", "successes", "asr"];

pub fn obfuscated_rows(cells: &[ObfuscatedCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            vec![
                c.method.clone(),
                c.levels.map_or_else(|| "none".into(), |l| l.to_string()),
                c.attacked.to_string(),
                c.successes.to_string(),
                fmt_f64(c.asr),
            ]
        })
        .collect()
}
