//! Results depend on the seed only, never on the worker count.

use loglab::drift::{shifted_event_probability, witness_lower_bound, WitnessConfig};
use loglab::estimator::{estimate_density_difference, estimate_z, EstimateRecord, MCConfig};
use loglab::scan::{run_scan, CutoffSchedule, ScanConfig};

fn bits(r: &EstimateRecord) -> [u64; 8] {
    [
        r.mean.to_bits(),
        r.stderr.to_bits(),
        r.sum.to_bits(),
        r.sumsq.to_bits(),
        r.min.to_bits(),
        r.max.to_bits(),
        r.indicator_hit_rate.to_bits(),
        r.cap_hit_rate.to_bits(),
    ]
}

const WORKERS: [usize; 3] = [1, 2, 8];

#[test]
fn estimates_ignore_the_worker_count() {
    let base = MCConfig {
        d: 2,
        cutoff: 12,
        lambda: 0.2,
        k: 12f64.ln(),
        cap: 40.0,
        p: 2.0,
        nsamples: 997,
        master_seed: 42,
        workers: 1,
    };
    let z: Vec<_> = WORKERS
        .iter()
        .map(|&w| bits(&estimate_z(&MCConfig { workers: w, ..base.clone() }).unwrap()))
        .collect();
    assert!(z.windows(2).all(|p| p[0] == p[1]));
    let diff: Vec<_> = WORKERS
        .iter()
        .map(|&w| {
            bits(&estimate_density_difference(&MCConfig { workers: w, p: 1.0, ..base.clone() }, 6).unwrap())
        })
        .collect();
    assert!(diff.windows(2).all(|p| p[0] == p[1]));
}

#[test]
fn witness_ignores_the_worker_count() {
    let base = WitnessConfig {
        d: 2,
        cutoff: 8,
        m: None,
        gamma: 0.05,
        lambda: 0.5,
        k: 8f64.ln(),
        k_m: None,
        cap: 100.0,
        nsamples: 501,
        master_seed: 7,
        workers: 1,
    };
    let runs: Vec<_> = WORKERS
        .iter()
        .map(|&w| {
            let c = WitnessConfig { workers: w, ..base.clone() };
            let (event, cheb) = shifted_event_probability(&c).unwrap();
            (bits(&witness_lower_bound(&c).unwrap()), bits(&event), cheb.to_bits())
        })
        .collect();
    assert!(runs.windows(2).all(|p| p[0] == p[1]));
}

#[test]
fn scan_rows_are_reproducible() {
    let base = ScanConfig {
        d: 2,
        cutoffs: vec![4, 6, 8],
        c: vec![0.0, 3.0],
        schedules: vec![CutoffSchedule::Log { kappa: 1.0 }],
        nsamples: 150,
        master_seed: 3,
        ..ScanConfig::default()
    };
    let runs: Vec<_> = WORKERS
        .iter()
        .map(|&w| {
            serde_json::to_string(&run_scan(&ScanConfig { workers: w, ..base.clone() }).unwrap()).unwrap()
        })
        .collect();
    assert!(runs.windows(2).all(|p| p[0] == p[1]));
    assert_eq!(runs[0], serde_json::to_string(&run_scan(&base).unwrap()).unwrap());
}

#[test]
fn seeds_change_results() {
    let base = MCConfig {
        d: 2,
        cutoff: 6,
        lambda: 0.0,
        k: 1.0,
        cap: f64::INFINITY,
        p: 1.0,
        nsamples: 300,
        master_seed: 1,
        workers: 2,
    };
    let a = estimate_z(&base).unwrap();
    let b = estimate_z(&MCConfig { master_seed: 2, ..base }).unwrap();
    assert_ne!(a.sum, b.sum);
}
