//! Shadow standard-map codes near the anti-integrable limit.
//!
//! Runs every period-3 pattern of second differences in {−π, 0, π} at
//! λ = 12, σ = π/4, then the period-2 orbit at λ = 20 against its closed form.

use std::f64::consts::{FRAC_PI_4, PI};

use ailimit::standard_map::{lambda0, shadow_code, StandardMapParams};
use ailimit::symbolic::StandardCode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = StandardMapParams::new(12.0, FRAC_PI_4, PI)?;
    println!("λ₀(π, π/4) = {:.4}", lambda0(PI, FRAC_PI_4)?);

    let mut worst_rho: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for b in 0..27 {
        let diffs: Vec<i64> = (0..3).map(|j| (b / 3i64.pow(j)) % 3 - 1).collect();
        let pattern: Vec<i64> = diffs.iter().cycle().take(12).copied().collect();
        let code = StandardCode::from_second_differences(0, 0, &pattern);
        let orbit = shadow_code(&code, &params)?;
        worst_rho = worst_rho.max(orbit.rho);
        worst_ratio = worst_ratio.max(orbit.contraction_estimate);
        if b == 5 {
            println!("pattern {diffs:?}: residual {:.1e}, {} sweeps", orbit.residual, orbit.iterations);
            for (k, x) in orbit.points.iter().enumerate().take(6) {
                println!("  x_{k} = {x:>12.8}   a_{k} = {:>12.8}", code.value(k));
            }
        }
    }
    println!("27 codes: max ρ = {worst_rho:.4} (< π/4), max sweep ratio = {worst_ratio:.4}");
    println!("contraction bound 4/(λ cos σ) = {:.4}", 4.0 / (12.0 * FRAC_PI_4.cos()));

    let params = StandardMapParams::new(20.0, FRAC_PI_4, 2.0 * PI)?;
    let orbit = shadow_code(&StandardCode::periodic(vec![0, 1]), &params)?;
    let u = (2.0 * PI / 20.0).asin();
    println!("period 2: x = ({:.10}, π + {:.10}), closed form u = {u:.10}", orbit.points[0], orbit.points[1] - PI);
    Ok(())
}
