//! Generator and discriminator templates.
//!
//! G: Dense -> 4x4 feature map -> [Upsample2x -> Conv3x3 -> LeakyReLU] per
//! doubling -> Conv3x3 -> Tanh. D mirrors it with Conv3x3 -> LeakyReLU ->
//! AvgPool2x per halving and a Dense logit.

use freqgan_nn::LayerSpec;

pub const LEAKY_SLOPE: f64 = 0.2;

fn doublings(size: usize) -> usize {
    (size / 4).trailing_zeros() as usize
}

pub fn generator_specs(
    latent_dim: usize,
    size: usize,
    channels: usize,
    width: usize,
) -> Vec<LayerSpec> {
    let blocks = doublings(size);
    let mut ch = width * 2;
    let mut specs = vec![
        LayerSpec::Dense {
            inputs: latent_dim,
            outputs: ch * 16,
        },
        LayerSpec::Reshape {
            channels: ch,
            height: 4,
            width: 4,
        },
    ];
    for _ in 0..blocks {
        let next = (ch / 2).max(4);
        specs.push(LayerSpec::UpsampleNearest2x);
        specs.push(LayerSpec::Conv3x3 {
            in_channels: ch,
            out_channels: next,
        });
        specs.push(LayerSpec::LeakyRelu(LEAKY_SLOPE));
        ch = next;
    }
    specs.push(LayerSpec::Conv3x3 {
        in_channels: ch,
        out_channels: channels,
    });
    specs.push(LayerSpec::Tanh);
    specs
}

pub fn discriminator_specs(size: usize, channels: usize, width: usize) -> Vec<LayerSpec> {
    let blocks = doublings(size);
    let mut specs = Vec::new();
    let mut ch = channels;
    let mut next = (width / 2).max(1);
    let mut side = size;
    for _ in 0..blocks {
        specs.push(LayerSpec::Conv3x3 {
            in_channels: ch,
            out_channels: next,
        });
        specs.push(LayerSpec::LeakyRelu(LEAKY_SLOPE));
        specs.push(LayerSpec::AvgPool2x);
        ch = next;
        next *= 2;
        side /= 2;
    }
    specs.push(LayerSpec::Dense {
        inputs: ch * side * side,
        outputs: 1,
    });
    specs
}

#[cfg(test)]
mod tests {
    use super::*;
    use freqgan_nn::Network;
    use rand::SeedableRng;

    #[test]
    fn templates_chain_to_expected_shapes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for (size, c) in [(16, 1), (32, 3)] {
            let g = Network::new(&[8], &generator_specs(8, size, c, 16), &mut rng).unwrap();
            assert_eq!(g.output_shape(), vec![c, size, size]);
            let d = Network::new(
                &[c, size, size],
                &discriminator_specs(size, c, 16),
                &mut rng,
            )
            .unwrap();
            assert_eq!(d.output_shape(), vec![1]);
        }
    }
}
