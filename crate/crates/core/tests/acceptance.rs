//! Runs the full acceptance battery and prints one line per criterion.
//!
//! Uses its own harness so the lines appear without `--nocapture`.

#![allow(clippy::excessive_precision)]

use std::process::ExitCode;
use std::time::Instant;

use hardy_sharp::experiments::{epsilon_ratio, maximize_ratio, EPSILON_SWEEP};
use hardy_sharp::quadrature::DEFAULT_TOL;
use hardy_sharp::selftest::CRITERIA;
use hardy_sharp::Exponent;

// Normalized ratios of the sharpness family over the default sweep, computed
// at 50 digits by tests/oracle/reference.py.
const EPSILON_PINS: [(f64, [f64; 5]); 3] = [
    (
        1.25,
        [
            0.331_194_586_261_450_64,
            0.474_150_651_572_003_61,
            0.630_588_132_730_618_79,
            0.804_541_489_185_200_79,
            0.890_460_032_524_708,
        ],
    ),
    (
        2.0,
        [
            0.505_553_291_214_008_36,
            0.649_938_227_063_435_43,
            0.776_371_601_567_598_93,
            0.892_036_251_434_303_37,
            0.941_947_660_386_844_48,
        ],
    ),
    (
        4.0,
        [
            0.525_539_290_905_324_96,
            0.690_549_583_585_084_75,
            0.812_078_911_427_998_2,
            0.912_051_671_520_698_08,
            0.953_161_034_299_507_23,
        ],
    ),
];

// Reference optimizer run: degree 8, p = 1.5, budget 50000, seed 42.
const OPTIMIZER_PIN: f64 = 0.382_037_345_754_412_2;

fn regression_pins() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    for (p, want) in EPSILON_PINS {
        let e = Exponent::new(p).unwrap();
        let worst = EPSILON_SWEEP
            .iter()
            .zip(want)
            .map(|(&eps, w)| match epsilon_ratio(e, eps, DEFAULT_TOL) {
                Ok(r) => (r.normalized - w).abs(),
                Err(_) => f64::INFINITY,
            })
            .fold(0.0, f64::max);
        out.push((
            format!("epsilon sweep pins at p = {p}: max deviation {worst:.1e}"),
            worst <= 1e-8,
        ));
    }
    let run = maximize_ratio(Exponent::new(1.5).unwrap(), 8, 50_000, 42, DEFAULT_TOL);
    let (msg, ok) = match run {
        Ok(r) => {
            let dev = (r.best.normalized - OPTIMIZER_PIN).abs();
            (
                format!(
                    "optimizer reference run: best {:.12} after {} evaluations",
                    r.best.normalized, r.evaluations
                ),
                dev <= 1e-6 && r.best.normalized <= 1.0 + 1e-6,
            )
        }
        Err(e) => (format!("optimizer reference run failed: {e}"), false),
    };
    out.push((msg, ok));
    out
}

fn main() -> ExitCode {
    let mut failed = 0;
    println!("acceptance criteria");
    for criterion in CRITERIA {
        let start = Instant::now();
        let outcome = criterion();
        println!("{}  [{:.1?}]", outcome.line(), start.elapsed());
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("regression pins");
    for (msg, ok) in regression_pins() {
        println!("[{}] {msg}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} check(s) failed");
        ExitCode::FAILURE
    }
}
