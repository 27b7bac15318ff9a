//! Rescaling reference density (articles and benchmark alike) must not move
//! any score.

use citequal::features::ArticleFeatures;
use citequal::score::{compute_medians, score_article, MedianBenchmarks};
use citequal::PageId;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::{ensure, Outcome};

const TOL: f64 = 1e-9;

fn random_article(rng: &mut StdRng, id: u64) -> ArticleFeatures {
    let length = rng.random_range(0..200_000u64);
    let references = rng.random_range(0..400u64);
    ArticleFeatures::from_counts(
        PageId(id),
        length,
        references,
        rng.random_range(0..60),
        rng.random_range(0..40),
        rng.random_range(0..25),
    )
}

fn scaled(a: &ArticleFeatures, c: f64) -> ArticleFeatures {
    ArticleFeatures {
        ref_density: a.ref_density * c,
        ..a.clone()
    }
}

pub fn run() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5ca1e);
    let articles: Vec<ArticleFeatures> = (1..=2000).map(|i| random_article(&mut rng, i)).collect();
    let featured: Vec<ArticleFeatures> = (5001..=5051).map(|i| random_article(&mut rng, i)).collect();
    // refs per byte, per 1000 bytes, per megabyte, and arbitrary factors
    let mut factors = vec![1e-3, 1.0, 1e3, 1e6];
    factors.extend((0..16).map(|_| 10f64.powf(rng.random_range(-6.0..6.0))));

    let base_bench = compute_medians(&featured, "xx").map_err(|e| e.to_string())?;
    let base: Vec<f64> = articles
        .iter()
        .map(|a| score_article(a, &base_bench).map(|s| s.score))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;

    let mut worst = 0.0f64;
    for &c in &factors {
        // the median scaled directly, and the median recomputed from
        // rescaled best-rated articles
        let mut direct = base_bench.medians;
        direct[2] *= c;
        let direct = MedianBenchmarks::new("xx", direct).map_err(|e| e.to_string())?;
        let rescaled: Vec<_> = featured.iter().map(|a| scaled(a, c)).collect();
        let recomputed = compute_medians(&rescaled, "xx").map_err(|e| e.to_string())?;
        for bench in [&direct, &recomputed] {
            for (a, want) in articles.iter().zip(&base) {
                let got = score_article(&scaled(a, c), bench).map_err(|e| e.to_string())?.score;
                let err = (got - want).abs();
                worst = worst.max(err);
                ensure!(err <= TOL, "factor {c:e}, page {}: score {got} vs {want}", a.page_id);
            }
        }
    }
    Ok(format!(
        "{} articles x {} factors x 2 benchmark routes, max drift {worst:.1e}",
        articles.len(),
        factors.len()
    ))
}
