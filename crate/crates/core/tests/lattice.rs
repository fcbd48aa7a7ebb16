use std::f64::consts::PI;

use coherence_core::lattice::torus_indices;
use coherence_core::{Complex64, LocalArray, MultiIndex};
use proptest::prelude::*;

// Arrays on Z^d with support radius <= r and entries in [-5, 5].
fn array(d: usize, r: i64) -> impl Strategy<Value = LocalArray> {
    let side = (2 * r + 1) as usize;
    let n = side.pow(d as u32);
    prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], n).prop_map(move |vals| {
        let entries = vals.into_iter().enumerate().map(|(i, v)| {
            let mut rem = i;
            let coords: Vec<i64> = (0..d)
                .map(|_| {
                    let c = (rem % side) as i64 - r;
                    rem /= side;
                    c
                })
                .collect();
            (MultiIndex::new(coords), v)
        });
        LocalArray::new(d, entries).unwrap()
    })
}

fn any_array() -> impl Strategy<Value = LocalArray> {
    (1usize..=2, 1i64..=2).prop_flat_map(|(d, r)| array(d, r))
}

fn symmetrized(a: &LocalArray) -> LocalArray {
    let mirrored = LocalArray::new(a.dim(), a.entries().iter().map(|(k, v)| (-k, *v))).unwrap();
    a.add(&mirrored)
}

fn relative(a: &LocalArray) -> LocalArray {
    a.add(&LocalArray::scalar(a.dim(), -a.sum()))
}

fn dft(x: &[f64], d: usize, l: usize) -> Vec<Complex64> {
    torus_indices(d, l)
        .map(|n| {
            torus_indices(d, l)
                .map(|k| {
                    let phase = -2.0 * PI * (n.dot(&k).rem_euclid(l as i64)) as f64 / l as f64;
                    Complex64::from_polar(x[k.linear_index(l)], phase)
                })
                .sum()
        })
        .collect()
}

proptest! {
    #[test]
    fn dft_samples_the_z_symbol(a in any_array(), extra in 0usize..20, seed in any::<u64>()) {
        let l = 2 * a.support_radius() + 1 + extra;
        let n = MultiIndex::from_linear((seed % l.pow(a.dim() as u32) as u64) as usize, a.dim(), l);
        let by_dft = a.dft_symbol(&n, l).unwrap();
        let by_z = a.z_symbol(&n.to_theta(l));
        let scale = 1.0 + a.entries().iter().map(|e| e.1.abs()).sum::<f64>();
        prop_assert!((by_dft - by_z).norm() <= 1e-12 * scale);
    }

    #[test]
    fn symmetric_symbols_are_real(a in any_array(), thetas in prop::collection::vec(-PI..PI, 200)) {
        let s = symmetrized(&a);
        prop_assert!(s.is_symmetric());
        for th in thetas.chunks(s.dim()).take(100) {
            if th.len() == s.dim() {
                prop_assert!(s.z_symbol(th).im.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn relative_symbols_vanish_at_origin(a in any_array()) {
        let r = relative(&a);
        prop_assert!(r.is_relative());
        prop_assert!(r.z_symbol(&vec![0.0; r.dim()]).norm() <= 1e-12);
    }

    #[test]
    fn convolution_diagonalizes(
        a in any_array(),
        extra in 0usize..8,
        xs in prop::collection::vec(-1.0..1.0f64, 1024),
    ) {
        let d = a.dim();
        let l = (2 * a.support_radius() + 1 + extra).min(if d == 1 { 32 } else { 12 });
        let n = l.pow(d as u32);
        let x = &xs[..n];
        let h = a.circular_convolve(x, l).unwrap();
        let (hh, xx) = (dft(&h, d, l), dft(x, d, l));
        for (i, k) in torus_indices(d, l).enumerate() {
            let expect = a.dft_symbol(&k, l).unwrap() * xx[i];
            prop_assert!((hh[i] - expect).norm() <= 1e-9 * (1.0 + expect.norm()));
        }
    }
}

#[test]
fn small_lattice_refused() {
    let a = LocalArray::from_1d(&[(-2, 1.0), (0, -2.0), (2, 1.0)]).unwrap();
    assert!(a.dft_symbol(&MultiIndex::new([1]), 4).is_err());
    assert!(a.dft_symbol(&MultiIndex::new([1]), 5).is_ok());
}
