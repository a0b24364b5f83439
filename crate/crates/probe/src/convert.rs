use freqgan_core::ImageGrid;
use freqgan_nn::{Network, Tensor};

use crate::error::{ProbeError, Result};

/// Stacks same-shaped images into a `[B, C, H, W]` tensor.
pub fn images_to_tensor(images: &[ImageGrid]) -> Result<Tensor> {
    let first = images.first().ok_or(ProbeError::Empty("image batch"))?;
    let (h, w, c) = first.dims();
    let mut data = Vec::with_capacity(images.len() * h * w * c);
    for img in images {
        if !img.same_shape(first) {
            return Err(ProbeError::Shape(format!(
                "batch mixes {:?} and {:?}",
                first.dims(),
                img.dims()
            )));
        }
        data.extend_from_slice(img.data());
    }
    Ok(Tensor::new(vec![images.len(), c, h, w], data)?)
}

pub fn tensor_to_images(t: &Tensor) -> Result<Vec<ImageGrid>> {
    let &[b, c, h, w] = t.shape() else {
        return Err(ProbeError::Shape(format!(
            "expected [B, C, H, W], got {:?}",
            t.shape()
        )));
    };
    let per = c * h * w;
    (0..b)
        .map(|k| {
            Ok(ImageGrid::new(
                h,
                w,
                c,
                t.data()[k * per..(k + 1) * per].to_vec(),
            )?)
        })
        .collect()
}

/// Anything that scores an image batch with one logit per image.
pub trait Discriminator {
    fn logits(&self, batch: &[ImageGrid]) -> Result<Vec<f64>>;
}

impl Discriminator for Network {
    fn logits(&self, batch: &[ImageGrid]) -> Result<Vec<f64>> {
        let out = self.predict(&images_to_tensor(batch)?)?;
        if out.len() != batch.len() {
            return Err(ProbeError::Shape(format!(
                "discriminator produced {:?} for {} images",
                out.shape(),
                batch.len()
            )));
        }
        Ok(out.into_data())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_layout() {
        let a = ImageGrid::from_fn(2, 3, 3, |c, i, j| (c * 6 + i * 3 + j) as f64 / 20.0).unwrap();
        let b = a.scaled(-1.0).unwrap();
        let t = images_to_tensor(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(t.shape(), &[2, 3, 2, 3]);
        assert_eq!(t.data()[18 + 7], b.get(1, 0, 1));
        assert_eq!(tensor_to_images(&t).unwrap(), vec![a, b]);
    }

    #[test]
    fn mixed_shapes_rejected() {
        let a = ImageGrid::zeros(2, 2, 1).unwrap();
        let b = ImageGrid::zeros(3, 2, 1).unwrap();
        assert!(images_to_tensor(&[a, b]).is_err());
        assert!(images_to_tensor(&[]).is_err());
    }
}
