//! GAN value-function terms in the max convention: the discriminator
//! maximises `E[g1(D(x_real))] + E[g2(D(x_fake))]`.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LossKind {
    Vanilla,
    Lsgan,
    #[default]
    Hinge,
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl LossKind {
    /// Term applied to discriminator outputs on real samples.
    pub fn g1(self, t: f64) -> f64 {
        match self {
            LossKind::Vanilla => -softplus(-t),
            LossKind::Hinge => -(1.0 - t).max(0.0),
            LossKind::Lsgan => -(t - 1.0) * (t - 1.0),
        }
    }

    /// Term applied to discriminator outputs on generated samples.
    pub fn g2(self, t: f64) -> f64 {
        match self {
            LossKind::Vanilla => -softplus(t),
            LossKind::Hinge => -(1.0 + t).max(0.0),
            LossKind::Lsgan => -t * t,
        }
    }

    pub fn g1_prime(self, t: f64) -> f64 {
        match self {
            LossKind::Vanilla => logistic(-t),
            LossKind::Hinge => {
                if t < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LossKind::Lsgan => -2.0 * (t - 1.0),
        }
    }

    pub fn g2_prime(self, t: f64) -> f64 {
        match self {
            LossKind::Vanilla => -logistic(t),
            LossKind::Hinge => {
                if t > -1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Lsgan => -2.0 * t,
        }
    }

    /// Per-sample loss the generator minimises on fake logits: softplus(-t)
    /// for vanilla, `(t - 1)^2` for LSGAN, `-t` for hinge.
    pub fn generator_loss(self, t: f64) -> f64 {
        match self {
            LossKind::Vanilla => softplus(-t),
            LossKind::Hinge => -t,
            LossKind::Lsgan => (t - 1.0) * (t - 1.0),
        }
    }

    pub fn generator_loss_prime(self, t: f64) -> f64 {
        match self {
            LossKind::Vanilla => -logistic(-t),
            LossKind::Hinge => -1.0,
            LossKind::Lsgan => 2.0 * (t - 1.0),
        }
    }

    /// Discriminator loss to minimise, `-(mean g1(real) + mean g2(fake))`,
    /// with its gradients w.r.t. each logit.
    pub fn discriminator_loss(
        self,
        real_logits: &[f64],
        fake_logits: &[f64],
    ) -> (f64, Vec<f64>, Vec<f64>) {
        let nr = real_logits.len() as f64;
        let nf = fake_logits.len() as f64;
        let value = -(real_logits.iter().map(|&t| self.g1(t)).sum::<f64>() / nr
            + fake_logits.iter().map(|&t| self.g2(t)).sum::<f64>() / nf);
        let gr = real_logits
            .iter()
            .map(|&t| -self.g1_prime(t) / nr)
            .collect();
        let gf = fake_logits
            .iter()
            .map(|&t| -self.g2_prime(t) / nf)
            .collect();
        (value, gr, gf)
    }

    /// Mean generator loss and its per-logit gradient.
    pub fn generator_objective(self, fake_logits: &[f64]) -> (f64, Vec<f64>) {
        let n = fake_logits.len() as f64;
        let value = fake_logits
            .iter()
            .map(|&t| self.generator_loss(t))
            .sum::<f64>()
            / n;
        let grad = fake_logits
            .iter()
            .map(|&t| self.generator_loss_prime(t) / n)
            .collect();
        (value, grad)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Vanilla => "vanilla",
            LossKind::Lsgan => "lsgan",
            LossKind::Hinge => "hinge",
        })
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vanilla" => Ok(LossKind::Vanilla),
            "lsgan" => Ok(LossKind::Lsgan),
            "hinge" => Ok(LossKind::Hinge),
            other => Err(format!(
                "unknown loss `{other}` (expected vanilla|lsgan|hinge)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_values() {
        assert_eq!(LossKind::Hinge.g1(2.0), 0.0);
        assert_eq!(LossKind::Hinge.g1(0.0), -1.0);
        assert_eq!(LossKind::Hinge.g2(-2.0), 0.0);
    }

    #[test]
    fn vanilla_at_zero() {
        assert!((LossKind::Vanilla.g1(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert!((LossKind::Vanilla.g1(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
        assert!(LossKind::Vanilla.g1(-800.0).is_finite());
    }

    #[test]
    fn lsgan_targets() {
        assert_eq!(LossKind::Lsgan.g1(1.0), 0.0);
        assert_eq!(LossKind::Lsgan.g2(0.0), 0.0);
        assert_eq!(LossKind::Lsgan.generator_loss(1.0), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for kind in [LossKind::Vanilla, LossKind::Lsgan, LossKind::Hinge] {
            for &t in &[-2.3, -0.4, 0.3, 1.7] {
                let d1 = (kind.g1(t + h) - kind.g1(t - h)) / (2.0 * h);
                let d2 = (kind.g2(t + h) - kind.g2(t - h)) / (2.0 * h);
                let dg = (kind.generator_loss(t + h) - kind.generator_loss(t - h)) / (2.0 * h);
                assert!((d1 - kind.g1_prime(t)).abs() < 1e-6, "{kind} g1' at {t}");
                assert!((d2 - kind.g2_prime(t)).abs() < 1e-6, "{kind} g2' at {t}");
                assert!(
                    (dg - kind.generator_loss_prime(t)).abs() < 1e-6,
                    "{kind} gen' at {t}"
                );
            }
        }
    }

    #[test]
    fn names_roundtrip() {
        for k in [LossKind::Vanilla, LossKind::Lsgan, LossKind::Hinge] {
            assert_eq!(k.to_string().parse::<LossKind>().unwrap(), k);
        }
        assert!("wgan".parse::<LossKind>().is_err());
    }
}
