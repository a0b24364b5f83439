//! Spectral paths checked against direct-summation oracles.

use std::f64::consts::PI;

use freqgan_core::{
    dft2, idft2, idft2_with_residual, power_spectrum, radial_bin_count, radial_profile,
    CenteredSpectrum, ImageGrid, PowerSpectrum,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(h: usize, w: usize, c: usize, seed: u64) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageGrid::from_fn(h, w, c, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
}

/// O(N^4) DFT with the centered output indexing written out explicitly.
fn direct_dft(img: &ImageGrid) -> Vec<Complex64> {
    let (h, w, channels) = img.dims();
    let (ci, cj) = (h / 2, w / 2);
    let mut out = vec![Complex64::new(0.0, 0.0); h * w * channels];
    for c in 0..channels {
        for i in 0..h {
            for j in 0..w {
                // centered bin (i, j) carries frequency (i - ci, j - cj)
                let k = i as f64 - ci as f64;
                let l = j as f64 - cj as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..h {
                    for n in 0..w {
                        let phase = -2.0 * PI * (k * m as f64 / h as f64 + l * n as f64 / w as f64);
                        acc += img.get(c, m, n) * Complex64::from_polar(1.0, phase);
                    }
                }
                out[(c * h + i) * w + j] = acc;
            }
        }
    }
    out
}

/// Per-pixel distance computation, no shared state with the library.
fn brute_radial(ps: &PowerSpectrum) -> (Vec<f64>, Vec<usize>) {
    let n_bins = (ps.height.min(ps.width) as f64 / 2f64.sqrt()).floor() as usize + 1;
    let mut bins = Vec::new();
    let mut counts = Vec::new();
    for b in 0..n_bins {
        let mut sum = 0.0;
        let mut n = 0;
        for i in 0..ps.height {
            for j in 0..ps.width {
                let di = i as f64 - (ps.height / 2) as f64;
                let dj = j as f64 - (ps.width / 2) as f64;
                if (di.hypot(dj)).round() as usize == b {
                    sum += ps.data[i * ps.width + j];
                    n += 1;
                }
            }
        }
        bins.push(if n > 0 { sum / n as f64 } else { 0.0 });
        counts.push(n);
    }
    (bins, counts)
}

#[test]
fn dft_matches_direct_sum() {
    for (seed, (h, w, c)) in [(8, 8, 1), (7, 6, 1), (16, 16, 1), (5, 9, 3), (2, 2, 1)]
        .into_iter()
        .enumerate()
    {
        let img = random_image(h, w, c, seed as u64);
        let fast = dft2(&img).unwrap();
        let slow = direct_dft(&img);
        let err = fast
            .data()
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{h}x{w}x{c}: {err}");
    }
}

#[test]
fn radial_profile_matches_brute_force() {
    for h in 2..=16 {
        for w in [2, 3, h, 16] {
            let img = random_image(h, w, 1, (h * 100 + w) as u64);
            let ps = power_spectrum(&dft2(&img).unwrap());
            let rp = radial_profile(&ps);
            let (bins, counts) = brute_radial(&ps);
            assert_eq!(rp.counts, counts, "{h}x{w}");
            for (a, b) in rp.bins.iter().zip(&bins) {
                assert!((a - b).abs() < 1e-10, "{h}x{w}");
            }
            assert_eq!(rp.len(), radial_bin_count(h, w));
            assert_eq!(rp.counts.iter().sum::<usize>() + rp.discarded, h * w);
            // odd sizes can leave the outermost bin empty (3x3 tops out at radius 1)
            if h % 2 == 0 && w % 2 == 0 {
                assert!(
                    rp.counts.iter().all(|&n| n >= 1),
                    "{h}x{w}: {:?}",
                    rp.counts
                );
            }
        }
    }
}

#[test]
fn counts_on_4x4_by_enumeration() {
    // Enumerate the 16 offsets (-2..=1)^2 and round their radii.
    let mut at_one = 0;
    for di in -2i32..=1 {
        for dj in -2i32..=1 {
            if (((di * di + dj * dj) as f64).sqrt()).round() == 1.0 {
                at_one += 1;
            }
        }
    }
    let ps = PowerSpectrum {
        height: 4,
        width: 4,
        data: vec![0.0; 16],
    };
    assert_eq!(radial_profile(&ps).counts[1], at_one);
}

#[test]
fn nyquist_lines_are_self_conjugate() {
    let img = random_image(8, 6, 1, 3);
    let z = dft2(&img).unwrap();
    // Row 0 is frequency -4 == +4 (mod 8); col 0 is -3 == +3 (mod 6).
    for j in 0..6 {
        let (mi, mj) = z.mirror(0, j);
        assert_eq!(mi, 0);
        assert!((z.get(0, mi, mj) - z.get(0, 0, j).conj()).norm() < 1e-10);
    }
    assert!(z.get(0, 0, 0).im.abs() < 1e-10);
    assert!(z.get(0, 0, 3).im.abs() < 1e-10);
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (
        2usize..=12,
        2usize..=12,
        prop_oneof![Just(1usize), Just(3usize)],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roundtrip((h, w, c) in dims(), seed in any::<u64>()) {
        let img = random_image(h, w, c, seed);
        let (back, residual) = idft2_with_residual(&dft2(&img).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&img) < 1e-10);
        prop_assert!(residual < 1e-10);
    }

    #[test]
    fn parseval((h, w, c) in dims(), seed in any::<u64>()) {
        let img = random_image(h, w, c, seed);
        let z = dft2(&img).unwrap();
        let spatial: f64 = img.data().iter().map(|v| v * v).sum();
        let spectral = z.energy() / (h * w) as f64;
        prop_assert!((spatial - spectral).abs() <= 1e-8 * spatial.max(1e-300));
    }

    #[test]
    fn linearity((h, w, c) in dims(), seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let x = random_image(h, w, c, seed);
        let y = random_image(h, w, c, seed.wrapping_add(1));
        let lhs = dft2(&x.axpby(a, &y, b).unwrap()).unwrap();
        let rhs = dft2(&x).unwrap().scaled(a).add(&dft2(&y).unwrap().scaled(b)).unwrap();
        let err = lhs.data().iter().zip(rhs.data()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn conjugate_symmetry((h, w, c) in dims(), seed in any::<u64>()) {
        let z = dft2(&random_image(h, w, c, seed)).unwrap();
        prop_assert!(z.symmetry_error() < 1e-10);
    }
}

#[test]
fn idft_of_scaled_constant_and_zero() {
    let z = CenteredSpectrum::zeros(8, 8, 1).unwrap();
    assert!(idft2(&z).unwrap().data().iter().all(|&v| v == 0.0));
    let img = random_image(32, 32, 1, 11);
    let back = idft2(&dft2(&img).unwrap()).unwrap();
    assert!(back.max_abs_diff(&img) < 1e-10);
}
