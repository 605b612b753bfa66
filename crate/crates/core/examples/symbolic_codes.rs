//! Transition graphs, admissible codes and their JSON files.

use ailimit::symbolic::{
    count_words, first_break, is_admissible, Code, StandardCode, TransitionGraph, VertexId,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = TransitionGraph::with_vertices(3);
    let ab = g.add_edge(VertexId(0), VertexId(1));
    let bc = g.add_edge(VertexId(1), VertexId(2));
    let ca = g.add_edge(VertexId(2), VertexId(0));
    let aa = g.add_edge(VertexId(0), VertexId(0));

    let code = Code::Periodic(vec![ab, bc, ca, aa]);
    println!("periodic code admissible: {}", is_admissible(&code, &g)?);
    println!("after rotation: {}", is_admissible(&code.rotated(2), &g)?);
    let broken = Code::Window(vec![ab, ca]);
    println!("window [ab, ca] breaks at slot {:?}", first_break(&broken, &g)?);

    for n in 1..=8 {
        print!("θ_{n} = {}  ", count_words(&g, n)?);
    }
    println!();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let path = g.random_path(10, Some(VertexId(0)), &mut rng)?;
    let file = Code::Window(path).to_json(&g)?;
    println!("graph: {}", serde_json::to_string(&g.to_json())?);
    println!("code:  {}", serde_json::to_string(&file)?);
    let back = Code::from_json(&file, &g)?;
    println!("reloaded admissible: {}", is_admissible(&back, &g)?);

    let sc = StandardCode::from_json_str(r#"{"multiples":[0,1,3,4],"periodic":false}"#)?;
    println!("standard code second differences: {:?}", sc.second_differences());
    Ok(())
}
