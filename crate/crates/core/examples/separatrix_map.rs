//! Separatrix map in Lagrangian form: random jump sequences shadowed and
//! checked against the map's generating relations.

use ailimit::dls::{shadow, ShadowConfig};
use ailimit::hyperbolicity::{cone_verify, variational_blocks, ConeParams};
use ailimit::models::{make_sepmap, Profile, SepMapSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SepMapSpec::new(1.0, Profile::neg_cos(1.0, 1.0), 10);
    let sm = make_sepmap(&spec)?;
    let u = &sm.uniformity;
    println!("{} pieces, {} edges; contraction bound {:.2e}", sm.system.pieces.len(), sm.system.graph.edge_count(), u.contraction_bound);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..3 {
        let code = sm.random_code(30, &mut rng)?;
        let orbit = shadow(&sm.system, &code, &ShadowConfig::default())?;
        let cone = cone_verify(&variational_blocks(&sm.system, &orbit)?, &ConeParams::default())?;
        let jumps: Vec<i64> = sm.slot_labels(&code).iter().take(8).map(|l| l.k).collect();
        println!(
            "jumps {jumps:?}..  residual {:.1e}  relations {:.1e}  log μ {:.2}",
            orbit.residual,
            sm.generating_relations_error(&orbit),
            cone.log_mu.unwrap_or(f64::NAN)
        );
        let global = sm.global_orbit(&orbit);
        println!("  X_0..X_3 = {:?}", global.iter().take(4).map(|g| (g.x * 1e6).round() / 1e6).collect::<Vec<_>>());
    }

    let mut small = spec.clone();
    small.c1 = 1;
    if let Err(e) = make_sepmap(&small) {
        println!("c1 = 1: {e}");
    }
    Ok(())
}
