#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropiscope::expr::{parse_expression, Expression};
use tropiscope::polyhedra::tropical_limit_set;

/// Random Laurent polynomial with 3 to 6 terms, exponents in -3..=3.
pub fn random_polynomial_text(rng: &mut ChaCha8Rng, n: usize) -> String {
    let m = rng.random_range(3..=6);
    let mut exps: Vec<Vec<i64>> = Vec::new();
    while exps.len() < m {
        let e: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        if !exps.contains(&e) {
            exps.push(e);
        }
    }
    let terms: Vec<String> = exps
        .iter()
        .map(|e| {
            let mag: f64 = rng.random_range(0.5..2.0);
            let c = if rng.random_bool(0.5) { mag } else { -mag };
            let mut t = format!("({c:.3})");
            for (j, a) in e.iter().enumerate() {
                t.push_str(&format!("*z{}^{}", j + 1, a));
            }
            t
        })
        .collect();
    terms.join(" + ")
}

/// `count` random polynomials in `n` variables whose tropical limit set is
/// nonempty.
pub fn corpus(seed: u64, n: usize, count: usize) -> Vec<(String, Expression)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let text = random_polynomial_text(&mut rng, n);
        let f = parse_expression(&text, n).expect("generated text parses");
        let Ok(p) = f.to_laurent() else { continue };
        match tropical_limit_set(&p) {
            Ok(c) if !c.cells.is_empty() => out.push((text, f)),
            _ => {}
        }
    }
    out
}

pub fn expr(text: &str, n: usize) -> Expression {
    parse_expression(text, n).unwrap()
}
