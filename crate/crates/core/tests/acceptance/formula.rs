//! Normalization, NMA and penalized score against hand-worked examples and a
//! brute-force oracle.

use std::time::Instant;

use citequal::features::ArticleFeatures;
use citequal::score::{compute_nma, compute_quality_score, normalize_feature, MedianBenchmarks};
use citequal::PageId;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::{ensure, Outcome};

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn article(values: [f64; 5], qft: u64) -> ArticleFeatures {
    ArticleFeatures {
        page_id: PageId(1),
        length: values[0] as u64,
        references: values[1] as u64,
        ref_density: values[2],
        images: values[3] as u64,
        sections: values[4] as u64,
        qft,
    }
}

/// Written from the formula, sharing nothing with the library: each feature
/// earns `100 * min(value / median, 1)` points, a zero median earns the full
/// 100, and every flaw template removes a twentieth of the average.
fn oracle(values: [f64; 5], medians: [f64; 5], qft: u64) -> (f64, f64) {
    let mut points = Vec::new();
    for i in 0..5 {
        let p = if medians[i] == 0.0 {
            100.0
        } else {
            100.0 * f64::min(values[i] / medians[i], 1.0)
        };
        points.push(p);
    }
    let nma = points.iter().sum::<f64>() / 5.0;
    let raw = nma - nma * qft as f64 / 20.0;
    (nma, if raw < 0.0 { 0.0 } else { raw })
}

fn examples() -> Outcome {
    let norm = |v, m| normalize_feature(v, m).map_err(|e| e.to_string());
    ensure!(close(norm(50.0, 40.0)?, 100.0), "(50, 40) should give 100");
    ensure!(close(norm(20.0, 40.0)?, 50.0), "(20, 40) should give 50");
    ensure!(close(norm(0.0, 0.0)?, 100.0), "(0, 0) should give 100");
    ensure!(normalize_feature(-1.0, 10.0).is_err(), "negative value accepted");
    ensure!(normalize_feature(1.0, -10.0).is_err(), "negative median accepted");

    let medians = [1000.0, 10.0, 10.0, 4.0, 10.0];
    let bench = MedianBenchmarks::new("xx", medians).map_err(|e| e.to_string())?;
    let nma = |values: [f64; 5]| compute_nma(&article(values, 0), &bench).map_err(|e| e.to_string());
    ensure!(close(nma([2000.0, 11.0, 10.0, 9.0, 10.0])?, 100.0), "all at or above medians should give 100");
    ensure!(close(nma([500.0, 5.0, 5.0, 2.0, 5.0])?, 50.0), "all at half the medians should give 50");
    // points 100, 50, 0, 100, 80
    ensure!(close(nma([1000.0, 5.0, 0.0, 4.0, 8.0])?, 66.0), "points (100, 50, 0, 100, 80) should average 66");

    for (nma, qft, want) in [(80.0, 0, 80.0), (80.0, 2, 72.0), (60.0, 25, 0.0), (55.5, 20, 0.0)] {
        let s = compute_quality_score(PageId(1), nma, qft);
        ensure!(close(s.score, want), "score({nma}, {qft}) = {} but expected {want}", s.score);
        if qft == 0 {
            ensure!(s.score == s.nma, "qft 0 must leave the score equal to nma");
        }
    }
    Ok("examples exact".into())
}

fn randomized(cases: usize) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0f64;
    for case in 0..cases {
        let mut medians = [0.0f64; 5];
        let mut values = [0.0f64; 5];
        for i in 0..5 {
            // a few zero medians and zero values, otherwise spread over decades
            medians[i] = if rng.random_bool(0.05) { 0.0 } else { rng.random_range(0.0..1e5) };
            values[i] = match rng.random_range(0..10) {
                0 => 0.0,
                1 => medians[i],
                _ => rng.random_range(0.0..2e5),
            };
        }
        // counts are integral, density is real
        for i in [0, 1, 3, 4] {
            values[i] = values[i].round();
        }
        let qft = rng.random_range(0..30u64);
        let bench = MedianBenchmarks::new("xx", medians).map_err(|e| e.to_string())?;
        let a = article(values, qft);
        let nma = compute_nma(&a, &bench).map_err(|e| e.to_string())?;
        let score = compute_quality_score(a.page_id, nma, qft).score;
        let (want_nma, want_score) = oracle(values, medians, qft);
        let err = (nma - want_nma).abs().max((score - want_score).abs());
        worst = worst.max(err);
        ensure!(
            err <= TOL,
            "case {case}: values {values:?} medians {medians:?} qft {qft}: got ({nma}, {score}), oracle ({want_nma}, {want_score})"
        );
        ensure!((0.0..=100.0).contains(&nma) && (0.0..=100.0).contains(&score), "case {case}: out of bounds");
    }
    Ok(format!("{cases} random cases, max error {worst:.1e}"))
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let ex = examples()?;
    let rnd = randomized(1000)?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 1.0, "took {elapsed:.3}s, limit 1s");
    Ok(format!("{ex}; {rnd}"))
}
