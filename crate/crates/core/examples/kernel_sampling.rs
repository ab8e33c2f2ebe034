//! Samples a random spline kernel under every rotation of an H grid, checks
//! that quarter turns permute the integer grid, and writes the stack as a
//! GST1 tensor.

use std::f64::consts::FRAC_PI_2;

use gspline::cli::tensor_io::{read_tensor, write_tensor, Dtype, Tensor};
use gspline::lie_groups::GroupKind;
use gspline::layers::{sample_transformed_kernels, StackMode};
use gspline::splines::{build_h_grid, build_spatial_centers, HLayout, SplineKernel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gspline::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("kernel_stack.gst").display().to_string());
    let (grid, centers) = build_h_grid(GroupKind::So2, 4, FRAC_PI_2, HLayout::Localized { n_k: 3 })?;
    let spatial = build_spatial_centers(5, 2, Some(5f64.sqrt()))?;
    println!("{} spatial centers (5x5 minus corners), {} H centers", spatial.len(), centers.len());
    let mut kernel = SplineKernel::new(1, GroupKind::So2, 2, spatial, Some(centers), 1.0, FRAC_PI_2, 1, 1)?;
    kernel.randomize(&mut ChaCha8Rng::seed_from_u64(0), 1.0);
    let stack = sample_transformed_kernels(&kernel, &grid, &[5, 5], StackMode::Group)?;

    // slice h = 1 at ht = 1 should be slice h = 0 at ht = 0 turned by 90 degrees
    let k0 = &stack.data[stack.offset(0, 0, 0, 0)..][..25];
    let k1 = &stack.data[stack.offset(1, 0, 0, 1)..][..25];
    let mut worst = 0.0f64;
    for y in 0..5 {
        for x in 0..5 {
            worst = worst.max((k1[y * 5 + x] - k0[x * 5 + (4 - y)]).abs());
        }
    }
    println!("quarter-turn permutation error {worst:.1e}");

    let dims = vec![stack.n_h, stack.out_channels, stack.in_channels, stack.n_ht, 5, 5];
    write_tensor(out.as_ref(), &Tensor::new(dims, stack.data.clone())?, Dtype::F64)?;
    let (back, _) = read_tensor(out.as_ref())?;
    println!("wrote {out} with dims {:?}; round trip exact: {}", back.dims, back.data == stack.data);
    Ok(())
}
