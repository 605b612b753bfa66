//! Billiard in a wide strip between two periodic walls.

use ailimit::dls::{shadow, ShadowConfig};
use ailimit::models::{make_strip_billiard, Profile, StripBilliardSpec, Wall};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f1 = Profile::cosine(0.1, 1.0);
    let f2 = Profile::cosine(0.07, 1.0);
    let billiard = make_strip_billiard(&StripBilliardSpec::new(f1.clone(), f2.clone(), 50.0))?;
    println!("lower critical points {:?}, upper {:?}", billiard.lower_points, billiard.upper_points);

    let bounces = [(Wall::Lower, 0.0), (Wall::Upper, 0.5), (Wall::Lower, 1.5), (Wall::Upper, 1.0)];
    let code = billiard.code_from_bounces(&bounces, true)?;
    let orbit = shadow(&billiard.system, &code, &ShadowConfig::default())?;
    println!("period-4 orbit: residual {:.1e}, reflection error {:.1e}", orbit.residual, billiard.reflection_error(&orbit));
    for (w, p) in billiard.slot_walls(&code).iter().zip(&orbit.points) {
        println!("  {w:?} wall at x = {:.9}", p[0]);
    }

    println!("\nresidual of the unrefined code against the width:");
    for d in [25.0, 50.0, 100.0, 200.0] {
        let b = make_strip_billiard(&StripBilliardSpec::new(f1.clone(), f2.clone(), d))?;
        let code = b.code_from_bounces(&[(Wall::Lower, 0.0), (Wall::Upper, 0.5)], true)?;
        println!("  d = {d:>5}: {:.4e}", b.residual_at_code(&code));
    }
    Ok(())
}
