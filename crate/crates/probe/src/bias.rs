//! Corpus radial power spectra and their real-minus-fake differences.

use freqgan_core::{dft2, power_spectrum, radial_profile, ImageGrid, RadialProfile};

use crate::error::{ProbeError, Result};

/// Bin-wise mean of per-image radial profiles. Each bin is summed in sorted
/// order, so any permutation of the corpus gives the same bits.
pub fn corpus_rps(images: &[ImageGrid]) -> Result<RadialProfile> {
    let first = images.first().ok_or(ProbeError::Empty("corpus"))?;
    let mut per_bin: Vec<Vec<f64>> = Vec::new();
    let mut template = None;
    for img in images {
        if img.height() != first.height() || img.width() != first.width() {
            return Err(ProbeError::Shape(format!(
                "corpus mixes {}x{} and {}x{}",
                first.height(),
                first.width(),
                img.height(),
                img.width()
            )));
        }
        let rp = radial_profile(&power_spectrum(&dft2(img)?));
        if per_bin.is_empty() {
            per_bin = vec![Vec::with_capacity(images.len()); rp.len()];
        }
        for (acc, &v) in per_bin.iter_mut().zip(&rp.bins) {
            acc.push(v);
        }
        template.get_or_insert(rp);
    }
    let mut out = template.expect("non-empty corpus");
    for (bin, values) in out.bins.iter_mut().zip(per_bin.iter_mut()) {
        values.sort_by(f64::total_cmp);
        *bin = values.iter().sum::<f64>() / values.len() as f64;
    }
    Ok(out)
}

/// `corpus_rps(real) - corpus_rps(fake)` per radius bin, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasCurve {
    pub bins: Vec<f64>,
}

impl BiasCurve {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

pub fn bias_curve(real: &[ImageGrid], fake: &[ImageGrid]) -> Result<BiasCurve> {
    let (r, f) = match (real.first(), fake.first()) {
        (Some(r), Some(f)) => (r, f),
        _ => return Err(ProbeError::Empty("bias curve needs two non-empty sets")),
    };
    if r.height() != f.height() || r.width() != f.width() {
        return Err(ProbeError::Shape(format!(
            "real {}x{} vs fake {}x{}",
            r.height(),
            r.width(),
            f.height(),
            f.width()
        )));
    }
    let a = corpus_rps(real)?;
    let b = corpus_rps(fake)?;
    Ok(BiasCurve {
        bins: a.bins.iter().zip(&b.bins).map(|(x, y)| x - y).collect(),
    })
}

/// Sum of `|curve[b]|` over bins `b <= r_max`.
pub fn bias_area(curve: &BiasCurve, r_max: f64) -> f64 {
    curve
        .bins
        .iter()
        .enumerate()
        .take_while(|(b, _)| *b as f64 <= r_max)
        .map(|(_, v)| v.abs())
        .sum()
}

/// First bin past DC whose absolute bias reaches `threshold_db`.
pub fn bias_onset(curve: &BiasCurve, threshold_db: f64) -> Option<usize> {
    curve
        .bins
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, v)| v.abs() >= threshold_db)
        .map(|(b, _)| b)
}
