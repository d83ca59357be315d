//! One line per acceptance criterion. Criterion 9 and the full-length
//! log-variance run need `KPZ_SLOW=1`.

use std::process::ExitCode;

use akpz::stats::LOG_VARIANCE_COEFF;
use akpz::suite::{self, Check, FAST_REPLICAS, FAST_T_MAX, FULL_REPLICAS, FULL_T_MAX};
use akpz_core::geometry::{limit_shape, MacroPoint};

const SEED: u64 = 0;

fn published_values() -> Check {
    let start = std::time::Instant::now();
    let h = limit_shape(&MacroPoint::new(1.0, 1.0, 1.0).unwrap()).unwrap().h;
    let e1 = (h - 0.608998).abs();
    let e2 = (LOG_VARIANCE_COEFF - 0.050660).abs();
    // both printed to six places; 0.050660 is truncated rather than rounded
    Check {
        criterion: 0,
        name: "printed constants".into(),
        pass: e1 < 1e-6 && e2 < 1e-6,
        value: e1.max(e2),
        threshold: 1e-6,
        detail: format!("h(1,1,1) = {h:.7}, 1/(2 pi^2) = {LOG_VARIANCE_COEFF:.7}"),
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn main() -> ExitCode {
    let slow = std::env::var("KPZ_SLOW").is_ok_and(|v| !v.is_empty() && v != "0");
    let (t_max, replicas) = if slow { (FULL_T_MAX, FULL_REPLICAS) } else { (FAST_T_MAX, FAST_REPLICAS) };
    let runs: Vec<(u32, Box<dyn Fn() -> akpz::Result<Check>>)> = vec![
        (0, Box::new(|| Ok(published_values()))),
        (1, Box::new(|| suite::lemma_oracle(1000, SEED))),
        (2, Box::new(suite::commutation)),
        (3, Box::new(|| suite::kernel_equivalence(suite::KERNEL_GRID_STEP))),
        (4, Box::new(suite::spectral)),
        (5, Box::new(|| suite::residues(20, SEED))),
        (6, Box::new(|| suite::simulation_vs_kernel(100_000, SEED))),
        (7, Box::new(|| suite::limit_shape_check(200.0, 200, SEED))),
        (8, Box::new(move || suite::log_variance(&suite::variance_times(t_max), replicas, SEED))),
        (9, Box::new(|| suite::green_covariance_check(300.0, 5000, SEED))),
        (10, Box::new(|| suite::geometry_derivatives(200, SEED))),
    ];
    let mut failed = 0;
    for (criterion, run) in runs {
        if criterion == 9 && !slow {
            println!("[SKIP] criterion  9 Green covariance of two heights: set KPZ_SLOW=1 (about an hour)");
            continue;
        }
        match run() {
            Ok(c) => {
                println!("{}", c.line());
                failed += usize::from(!c.pass);
            }
            Err(e) => {
                println!("[FAIL] criterion {criterion:>2}: error {e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
