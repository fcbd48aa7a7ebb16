//! Random admissible models, for fuzzing and randomized checks.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::admissibility::{hurwitz_grid_check, GridConfig};
use crate::error::{Error, Result};
use crate::lattice::{LocalArray, MultiIndex};
use crate::models::{ModelSpec, Template};

/// Uniform draw from `[lo, hi)`.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * u
}

/// Offsets in one half-space with `max_abs <= radius`: every unit axis first,
/// then longer and diagonal ones.
fn half_offsets(d: usize, radius: usize) -> Vec<MultiIndex> {
    let mut out: Vec<MultiIndex> = (0..d).map(|axis| MultiIndex::unit(d, axis, 1)).collect();
    let r = radius as i64;
    let side = (2 * r + 1) as usize;
    for idx in 0..side.pow(d as u32) {
        let mut rem = idx;
        let coords: Vec<i64> = (0..d)
            .map(|_| {
                let c = (rem % side) as i64 - r;
                rem /= side;
                c
            })
            .collect();
        let k = MultiIndex::new(coords);
        let first = k.coords().iter().find(|&&c| c != 0);
        if first.is_some_and(|&c| c > 0) && !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// Symmetric relative array `sum_k w_k (delta_k + delta_-k - 2 delta_0)`.
///
/// Unit axes always get weight in `[lo, hi)`, so the symbol is strictly
/// negative away from the origin. Other offsets are switched on at random.
pub fn random_laplacian<R: RngCore + ?Sized>(rng: &mut R, d: usize, radius: usize, lo: f64, hi: f64) -> LocalArray {
    let mut entries = Vec::new();
    for (i, k) in half_offsets(d, radius).into_iter().enumerate() {
        if i >= d && uniform(rng, 0.0, 1.0) < 0.5 {
            continue;
        }
        let w = uniform(rng, lo, hi);
        entries.push((MultiIndex::zero(d), -2.0 * w));
        entries.push((-&k, w));
        entries.push((k, w));
    }
    LocalArray::new(d, entries).expect("offsets share the dimension")
}

/// A random model of the given template that passes a grid admissibility
/// check. Arrays have support radius at most `radius`.
pub fn random_model<R: RngCore + ?Sized>(
    rng: &mut R,
    template: Template,
    d: usize,
    radius: usize,
) -> Result<ModelSpec> {
    if d == 0 || radius == 0 {
        return Err(Error::InvalidArgument("dimension and radius must be at least 1".into()));
    }
    let cfg = GridConfig {
        points_per_dim: if d == 1 { 512 } else { 64 },
        l_max: 1024,
    };
    for _ in 0..64 {
        let model = draw(rng, template, d, radius)?;
        if hurwitz_grid_check(&model, &cfg).is_admissible() {
            return Ok(model);
        }
    }
    Err(Error::InvalidArgument(alloc::format!(
        "no admissible {} model found",
        template.name()
    )))
}

fn draw<R: RngCore + ?Sized>(rng: &mut R, template: Template, d: usize, radius: usize) -> Result<ModelSpec> {
    let lap = |rng: &mut R, lo, hi| random_laplacian(rng, d, radius, lo, hi);
    let scalar = |v: f64| LocalArray::scalar(d, v);
    match template {
        Template::ConsensusStatic => ModelSpec::consensus_static(lap(rng, 0.2, 2.0)),
        Template::ConsensusDynamic => {
            let a = lap(rng, 0.0, 0.5).add(&scalar(-uniform(rng, 0.3, 2.0)));
            let b = lap(rng, 0.0, 1.0);
            ModelSpec::consensus_dynamic(a, b, lap(rng, 0.2, 2.0))
        }
        Template::VehicularStatic => {
            // absolute damping is either off or well clear of zero, so the
            // scaling regime is settled at moderate sizes
            let g_o = if uniform(rng, 0.0, 1.0) < 0.5 {
                0.0
            } else {
                uniform(rng, 0.5, 2.0)
            };
            let g = lap(rng, 0.2, 2.0).add(&scalar(-g_o));
            ModelSpec::vehicular_static(lap(rng, 0.2, 2.0), g)
        }
        Template::VehicularDynamicRelative => {
            let a = lap(rng, 0.0, 0.5).add(&scalar(-uniform(rng, 0.5, 2.0)));
            let b = lap(rng, 0.0, 0.2);
            let c = lap(rng, 0.0, 1.0);
            ModelSpec::vehicular_dynamic(a, b, c, lap(rng, 0.2, 2.0), lap(rng, 0.2, 2.0))
        }
        Template::VehicularDynamicAbsolute => {
            let a = lap(rng, 0.2, 1.0);
            let c = scalar(-uniform(rng, 0.5, 2.0));
            let g = lap(rng, 0.0, 1.0).add(&scalar(-uniform(rng, 0.5, 2.0)));
            ModelSpec::vehicular_dynamic(a, LocalArray::zero(d), c, lap(rng, 0.2, 2.0), g)
        }
    }
}
