//! Cone-criterion hyperbolicity and the stable direction of a shadowing orbit.

use std::f64::consts::{FRAC_PI_4, PI};

use ailimit::hyperbolicity::{cone_verify, stable_vector, standard_blocks, ConeParams};
use ailimit::standard_map::{shadow_code, StandardMapParams};
use ailimit::symbolic::StandardCode;
use nalgebra::DVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = StandardMapParams::new(12.0, FRAC_PI_4, PI)?;
    let code = StandardCode::from_second_differences(0, 1, &[1, 0, -1, 1, 0, -1, 1, 0]);
    let orbit = shadow_code(&code, &params)?;
    let blocks = standard_blocks(&orbit)?;
    let report = cone_verify(&blocks, &ConeParams::default())?;
    println!("cone criterion: {}", serde_json::to_string(&report)?);

    // Fixed point x ≡ π: u_{k+1} + (λ − 2)u_k + u_{k−1} = 0, so the stable
    // variation decays like the small root 5 − √24 in modulus.
    let fixed = shadow_code(&StandardCode::periodic(vec![1; 40]), &params)?;
    let blocks = standard_blocks(&fixed)?;
    let v = stable_vector(&blocks, 0, &DVector::from_element(1, 1.0), 20, 2.0)?;
    let ratio = (v[5][0] / v[4][0]).abs();
    let root = 5.0 - 24f64.sqrt();
    println!("stable decay ratio {ratio:.8}, characteristic root {root:.8}");
    Ok(())
}
