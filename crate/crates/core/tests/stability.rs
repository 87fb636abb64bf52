mod common;

use std::time::Instant;

use fires_core::engine::SelectionMask;
use fires_core::stability::{stability_of, StabilityWindow};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

#[test]
fn worked_examples() {
    let same = vec![vec![true, false, true, false]; 10];
    assert_eq!(stability_of(&same).unwrap(), Some(1.0));

    let a = vec![true, true, false, false];
    let b = vec![false, false, true, true];
    let alternating: Vec<Vec<bool>> = (0..10)
        .map(|i| if i % 2 == 0 { a.clone() } else { b.clone() })
        .collect();
    let g = stability_of(&alternating).unwrap().unwrap();
    assert!((g + 1.0 / 9.0).abs() < 1e-15);
    assert_eq!(common::brute_force_stability(&alternating), Some(g));

    let e = vec![
        vec![true, false, false, false],
        vec![false, true, false, false],
    ];
    let g = stability_of(&e).unwrap().unwrap();
    assert!((g + 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn matches_brute_force_on_random_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 1000 {
        let j = rng.random_range(2..=30);
        let m = rng.random_range(1..j);
        let r = rng.random_range(2..=15);
        let masks: Vec<Vec<bool>> = (0..r)
            .map(|_| common::random_mask(&mut rng, j, m))
            .collect();

        let mut window = StabilityWindow::new(r, j, m).unwrap();
        for mask in &masks {
            window
                .push(&SelectionMask::from_indices(indices(mask), j).unwrap())
                .unwrap();
        }
        let oracle = common::brute_force_stability(&masks).unwrap();
        let fast = window.stability().unwrap();
        assert!((fast - oracle).abs() < 1e-12, "{fast} vs {oracle}");
        assert!((stability_of(&masks).unwrap().unwrap() - oracle).abs() < 1e-12);
        assert!(fast <= 1.0 + 1e-12);
        checked += 1;
    }
}

#[test]
fn sliding_window_matches_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (j, m, r) = (12, 4, 5);
    let mut window = StabilityWindow::new(r, j, m).unwrap();
    let mut history = vec![];
    for _ in 0..40 {
        let mask = common::random_mask(&mut rng, j, m);
        window
            .push(&SelectionMask::from_indices(indices(&mask), j).unwrap())
            .unwrap();
        history.push(mask);
        let start = history.len().saturating_sub(r);
        let expected = common::brute_force_stability(&history[start..]);
        match (window.stability(), expected) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
            (a, b) => assert_eq!(a, b),
        }
    }
    assert_eq!(window.len(), r);
}

#[test]
fn random_masks_average_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (j, m, r) = (20, 5, 10);
    let n = 10_000;
    let total: f64 = (0..n)
        .map(|_| {
            let masks: Vec<Vec<bool>> = (0..r)
                .map(|_| common::random_mask(&mut rng, j, m))
                .collect();
            stability_of(&masks).unwrap().unwrap()
        })
        .sum();
    let mean = total / n as f64;
    assert!(mean.abs() < 0.05, "mean {mean}");
}

#[test]
fn evaluation_time_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = 10;
    let sizes = [2_000usize, 4_000, 8_000, 16_000];
    let mut points = vec![];
    for &j in &sizes {
        let masks: Vec<Vec<bool>> = (0..r)
            .map(|_| common::random_mask(&mut rng, j, j / 10))
            .collect();
        let mut best = f64::INFINITY;
        for _ in 0..15 {
            let start = Instant::now();
            for _ in 0..20 {
                std::hint::black_box(stability_of(std::hint::black_box(&masks)).unwrap());
            }
            best = best.min(start.elapsed().as_secs_f64());
        }
        points.push(((r * j) as f64, best));
    }
    // least-squares line through the origin
    let slope = points.iter().map(|(n, t)| n * t).sum::<f64>()
        / points.iter().map(|(n, _)| n * n).sum::<f64>();
    for (n, t) in points {
        let ratio = t / (slope * n);
        assert!((0.5..2.0).contains(&ratio), "n={n} ratio {ratio}");
    }
}

proptest! {
    #[test]
    fn order_does_not_matter(seed in any::<u64>(), j in 3usize..25, r in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(1..j);
        let mut masks: Vec<Vec<bool>> = (0..r).map(|_| common::random_mask(&mut rng, j, m)).collect();
        let before = stability_of(&masks).unwrap();
        masks.shuffle(&mut rng);
        prop_assert_eq!(before, stability_of(&masks).unwrap());
    }

    #[test]
    fn identical_masks_are_perfectly_stable(seed in any::<u64>(), j in 3usize..25, r in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(1..j);
        let mask = common::random_mask(&mut rng, j, m);
        prop_assert_eq!(stability_of(&vec![mask; r]).unwrap(), Some(1.0));
    }
}

#[test]
fn window_rejects_inconsistent_masks() {
    let mut w = StabilityWindow::new(3, 5, 2).unwrap();
    assert!(w
        .push(&SelectionMask::from_indices(vec![0, 1, 2], 5).unwrap())
        .is_err());
    assert!(w
        .push(&SelectionMask::from_indices(vec![0, 1], 6).unwrap())
        .is_err());
    assert!(StabilityWindow::new(1, 5, 2).is_err());
    assert!(stability_of(&[vec![true, false], vec![true, true]]).is_err());
}
