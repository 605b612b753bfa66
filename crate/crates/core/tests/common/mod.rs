#![allow(dead_code)]

use std::f64::consts::TAU;

use ailimit::models::{make_kick_map, KickMap, KickMapSpec, Profile};
use ailimit::symbolic::StandardCode;
use nalgebra::DVector;

/// The standard map `L = (x − y)²/(2λ) − cos y` as a general system: a kick
/// map with `V = cos` and `B = 1/λ`.
pub fn standard_dls(lambda: f64) -> KickMap {
    make_kick_map(&KickMapSpec::new(vec![Profile::cosine(1.0, TAU)], 1.0 / lambda)).unwrap()
}

pub fn points_of(code: &StandardCode) -> Vec<DVector<f64>> {
    (0..code.len()).map(|k| DVector::from_element(1, code.value(k))).collect()
}

/// Window codes from all period-3 second-difference patterns in {−1, 0, 1}.
pub fn period3_codes(repeats: usize) -> Vec<StandardCode> {
    (0..27)
        .map(|b: i64| {
            let d: Vec<i64> = (0..3).map(|j| (b / 3i64.pow(j)) % 3 - 1).collect();
            let pattern: Vec<i64> = d.iter().cycle().take(3 * repeats).copied().collect();
            StandardCode::from_second_differences(0, 0, &pattern)
        })
        .collect()
}

/// Independent scalar Newton solve of the periodic standard-map equations
/// `x_{k+1} − 2x_k + x_{k−1} = λ sin x_k`, with a dense Jacobian.
pub fn standard_newton(start: &[f64], lambda: f64) -> Vec<f64> {
    let n = start.len();
    let mut x = start.to_vec();
    for _ in 0..60 {
        let f: Vec<f64> = (0..n)
            .map(|k| x[(k + 1) % n] - 2.0 * x[k] + x[(k + n - 1) % n] - lambda * x[k].sin())
            .collect();
        let mut j = nalgebra::DMatrix::zeros(n, n);
        for k in 0..n {
            j[(k, k)] += -2.0 - lambda * x[k].cos();
            j[(k, (k + 1) % n)] += 1.0;
            j[(k, (k + n - 1) % n)] += 1.0;
        }
        let step = j.lu().solve(&DVector::from_vec(f)).unwrap();
        for k in 0..n {
            x[k] -= step[k];
        }
        if step.amax() < 1e-15 {
            break;
        }
    }
    x
}
