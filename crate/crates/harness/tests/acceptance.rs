//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::path::Path;
use std::time::Duration;

use wgms_core::specfun::{bessel_j, bessel_y, CylinderOrder};
use wgms_harness::checks::{self, Check};
use wgms_harness::config::{Config, PlacementKind};
use wgms_harness::output::{summarize, write_rows, CellSummary};
use wgms_harness::sweep::run_sweep;
use wgms_harness::SweepRow;

const ORACLE: &str = include_str!("../../core/tests/data/bessel_oracle.csv");

fn special_functions() -> Check {
    let identities = checks::bessel_identities();
    Check::run("special functions against the series oracle", Duration::from_secs(5), || {
        let orders = [CylinderOrder::Zero, CylinderOrder::One, CylinderOrder::Two];
        let mut worst: f64 = 0.0;
        let mut points = 0;
        for line in ORACLE.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            for (i, nu) in orders.into_iter().enumerate() {
                worst = worst
                    .max((bessel_j(nu, v[0])? - v[1 + i]).abs() / v[1 + i].abs())
                    .max((bessel_y(nu, v[0])? - v[4 + i]).abs() / v[4 + i].abs());
            }
            points += 1;
        }
        Ok((
            points == 200 && worst <= 1e-10 && identities.passed,
            format!("{points} points, worst relative error {worst:.2e}; {}", identities.detail),
        ))
    })
}

fn reference() -> Config {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.json");
    Config::load(&path, &["sweep.trials=50".into()]).expect("reference configuration")
}

fn sweep_on(config: &Config, threads: usize) -> Vec<SweepRow> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_sweep(config))
}

fn mean_achieved(cells: &[CellSummary], kind: PlacementKind, n: usize) -> Option<f64> {
    cells.iter().find(|c| c.placement == kind && c.elements == n)?.achieved.map(|s| s.mean)
}

fn end_to_end(config: &Config, rows: &mut Option<Vec<SweepRow>>) -> Check {
    Check::run("end-to-end trend and ordering", Duration::from_secs(30 * 60), || {
        let out = sweep_on(config, 4);
        let cells = summarize(&out);
        let failed = out.iter().filter(|r| r.status != "ok").count();
        let small = mean_achieved(&cells, PlacementKind::UniformGrid, 16);
        let large = mean_achieved(&cells, PlacementKind::UniformGrid, 256);
        let wins = cells.iter().filter(|c| c.beats_random() == Some(true)).count();
        let trend = matches!((small, large), (Some(a), Some(b)) if b < a);
        let ordering = wins as f64 >= 0.9 * cells.len() as f64;
        for c in &cells {
            println!(
                "    {:<22} N={:<4} mean achieved {:.4e}  median achieved {:.4e}  median random {:.4e}",
                c.placement.to_string(),
                c.elements,
                c.achieved.map_or(f64::NAN, |s| s.mean),
                c.achieved.map_or(f64::NAN, |s| s.median),
                c.random_strength.map_or(f64::NAN, |s| s.median)
            );
        }
        *rows = Some(out);
        Ok((
            trend && ordering,
            format!(
                "uniform grid mean PEB {:.4e} m at N=16, {:.4e} m at N=256; optimized beats random in {wins}/{} cells; {failed} failed trials",
                small.unwrap_or(f64::NAN),
                large.unwrap_or(f64::NAN),
                cells.len()
            ),
        ))
    })
}

fn determinism(config: &Config, first: Option<&[SweepRow]>) -> Check {
    Check::run("determinism across thread counts", Duration::from_secs(30 * 60), || {
        let Some(first) = first else {
            return Ok((false, "no first run to compare against".into()));
        };
        let csv = |rows: &[SweepRow]| {
            let mut out = Vec::new();
            write_rows(&mut out, rows).unwrap();
            out
        };
        let a = csv(first);
        let b = csv(&sweep_on(config, 1));
        Ok((a == b, format!("{} bytes, {} rows, identical: {}", a.len(), first.len(), a == b)))
    })
}

fn main() {
    let config = reference();
    let mut results = vec![
        checks::greens_limits(&config),
        checks::passivity_balance(&config),
        special_functions(),
        checks::fim_consistency(&config),
        checks::peb_scaling(&config),
        checks::sdp_sanity(&config, 64),
        checks::neumann_accuracy(&config, 64),
        checks::retraction(&config, 64),
    ];
    for (i, c) in results.iter().enumerate() {
        println!("criterion {}: {}", i + 1, c.line());
    }
    let mut rows = None;
    let trend = end_to_end(&config, &mut rows);
    println!("criterion 9: {}", trend.line());
    let det = determinism(&config, rows.as_deref());
    println!("criterion 10: {}", det.line());
    results.extend([trend, det]);
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
