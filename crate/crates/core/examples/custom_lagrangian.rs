//! A hand-built system: `L(x, y) = (ε/2)(y − x)² + W(x)` with the double well
//! `W(x) = (x² − 1)²/4`, one piece and one edge per critical point of `W`.

use std::sync::Arc;

use ailimit::dls::{
    newton_oracle, shadow, uniformity_report, DiscreteLagrangian, DlsSystem, DomainBox,
    FnField1, HessianBlocks, LagrangianPiece, ScalarField, ShadowConfig, ZeroField,
};
use ailimit::symbolic::{Code, TransitionGraph, VertexId};
use nalgebra::{DMatrix, DVector};

struct DoubleWell {
    eps: f64,
    w: FnField1,
    zero: ZeroField,
}

impl DiscreteLagrangian for DoubleWell {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        0.5 * self.eps * (y[0] - x[0]).powi(2) + self.w.value(x)
    }
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.eps * (x[0] - y[0])) + self.w.gradient(x)
    }
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.eps * (y[0] - x[0]))
    }
    fn hessian(&self, x: &DVector<f64>, _y: &DVector<f64>) -> HessianBlocks {
        let e = |v| DMatrix::from_element(1, 1, v);
        HessianBlocks { xx: e(self.eps) + self.w.hessian(x), xy: e(-self.eps), yy: e(self.eps) }
    }
    fn v_minus(&self) -> &dyn ScalarField {
        &self.w
    }
    fn v_plus(&self) -> &dyn ScalarField {
        &self.zero
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lag = Arc::new(DoubleWell {
        eps: 0.01,
        w: FnField1::new(|x| 0.25 * (x * x - 1.0).powi(2), |x| x * (x * x - 1.0), |x| 3.0 * x * x - 1.0),
        zero: ZeroField(1),
    });
    let domain = DomainBox::cube(DVector::zeros(1), 2.0);
    let mut graph = TransitionGraph::with_vertices(1);
    let seeds: Vec<DVector<f64>> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|&s| {
            graph.add_edge(VertexId(0), VertexId(0));
            DVector::from_element(1, s)
        })
        .collect();
    let system = DlsSystem::from_seeds(graph, vec![LagrangianPiece::new(lag, domain.clone(), domain)], &seeds)?;
    let report = uniformity_report(&system, None, 0)?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    // Edge e visits critical point e ∈ {−1, 0, 1}.
    let code = Code::Periodic([0, 2, 2, 1, 0, 1].iter().map(|&e| ailimit::symbolic::EdgeId(e)).collect());
    let orbit = shadow(&system, &code, &ShadowConfig::default())?;
    let newton = newton_oracle(&system, &code, Some(&orbit.points), 1e-13)?;
    for (x, n) in orbit.points.iter().zip(&newton) {
        println!("{:>+.12}  (Newton {:>+.12})", x[0], n[0]);
    }
    println!("residual {:.1e}, ρ {:.3e} ≤ a-priori {:.3e}", orbit.residual, orbit.rho, orbit.rho_bound);
    Ok(())
}
