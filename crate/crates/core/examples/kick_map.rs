//! Light-particle kick maps: the one-dimensional case reproduces the
//! standard map, the two-dimensional case runs on a lifted lattice graph.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use ailimit::dls::{newton_oracle, shadow, uniformity_report, ShadowConfig};
use ailimit::hyperbolicity::{cone_verify, variational_blocks, ConeParams};
use ailimit::models::{make_kick_map, KickMapSpec, Profile};
use ailimit::standard_map::{shadow_code, StandardMapParams};
use ailimit::symbolic::StandardCode;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // B = ε² and V = −cos: the standard map with coupling −1/ε².
    let eps2 = 1.0 / 12.0;
    let km = make_kick_map(&KickMapSpec::new(vec![Profile::neg_cos(1.0, TAU)], eps2))?;
    println!("classes {:?}, {} lifted sites", km.classes.iter().map(|c| c[0]).collect::<Vec<_>>(), km.sites().len());

    let multiples = [0i64, 1, 1, 0, -1, -1, 0, 1];
    let points: Vec<DVector<f64>> = multiples.iter().map(|&m| DVector::from_element(1, PI * m as f64)).collect();
    let code = km.code_from_points(&points, true)?;
    let orbit = shadow(&km.system, &code, &ShadowConfig { sigma: Some(FRAC_PI_4), ..ShadowConfig::default() })?;
    let sm = shadow_code(&StandardCode::periodic(multiples.to_vec()), &StandardMapParams::new(-1.0 / eps2, FRAC_PI_4, 2.0 * PI)?)?;
    let gap = orbit.points.iter().zip(&sm.points).map(|(a, b)| (a[0] - b).abs()).fold(0.0, f64::max);
    println!("kick vs standard map (λ = −12): max difference {gap:.2e}");

    // Two degrees of freedom with a two-well profile.
    let spec = KickMapSpec::new(vec![Profile::TwoWell { amplitude: 1.0, period: TAU }, Profile::neg_cos(1.0, TAU)], 0.002);
    let km = make_kick_map(&spec)?;
    let report = uniformity_report(&km.system, None, 0)?;
    println!("\n2-d kick map: {} classes, {} pieces", km.classes.len(), km.system.pieces.len());
    println!("uniformity: lip {:.3}, ε {:.2e}, 2·lip·ε = {:.2e}, satisfied {}", report.lip_max, report.eps, report.contraction_bound, report.satisfied);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let code = km.random_code(24, &mut rng)?;
    let orbit = shadow(&km.system, &code, &ShadowConfig::default())?;
    let newton = newton_oracle(&km.system, &code, None, 1e-13)?;
    let gap = orbit.points.iter().zip(&newton).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let cone = cone_verify(&variational_blocks(&km.system, &orbit)?, &ConeParams::default())?;
    println!("random code: residual {:.1e}, ρ {:.2e}, Newton gap {gap:.1e}, cone {:?} μ = {:.1}", orbit.residual, orbit.rho, cone.tier, cone.mu.unwrap_or(f64::NAN));
    Ok(())
}
