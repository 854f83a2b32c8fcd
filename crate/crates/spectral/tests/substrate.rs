//! Cross-module properties of the spectral substrate on random data.

use num_complex::Complex64;
use proptest::prelude::*;
use scalarforge_spectral::band::BandSpec;
use scalarforge_spectral::invdiv::inverse_divergence;
use scalarforge_spectral::{DirectionPair, Field, Grid, Symbol2, VectorField};

fn real_field(n: usize) -> impl Strategy<Value = Field> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |vals| {
        Field::from_real_values(Grid::new(n).unwrap(), &vals)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_roundtrip_and_parseval(f in real_field(32)) {
        let g = Field::from_coeffs(f.grid(), f.coeffs().to_vec());
        prop_assert!(g.sub(&f).c0() <= 1e-11);
        prop_assert!(f.parseval_gap() <= 1e-11);
    }

    #[test]
    fn band_projection_never_grows_l2(f in real_field(32), q in 1u32..3) {
        // q = 3 would need modes past max_freq(32) = 15 and is rejected
        assert!(BandSpec::LowPass { q: 3 }.project(&f).is_err());
        let band = BandSpec::LowPass { q };
        let p = band.project(&f).unwrap();
        prop_assert!(p.l2() <= f.l2() * (1.0 + 1e-12));
        // idempotent on its own plateau: modes at |k| ≤ 1.25·2^q are untouched,
        // so a field already strictly inside passes through unchanged
        let inner = f.map_modes(|k, c| {
            let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
            if r <= 1.25 * (1 << q) as f64 { c } else { Complex64::ZERO }
        });
        let pp = band.project(&inner).unwrap();
        prop_assert!(pp.sub(&inner).c0() <= 1e-12);
    }

    #[test]
    fn drift_is_divergence_free_mode_by_mode(f in real_field(32), odd in any::<bool>()) {
        let sym = if odd { Symbol2::sqg() } else { Symbol2::ipm() };
        let u = sym.apply(&f);
        let scale = u.c0().max(1e-300);
        prop_assert!(u.div_defect_per_mode() <= 1e-12 * scale);
        // and real input gives real output
        prop_assert!(u.component(0).max_imag() <= 1e-12 * scale);
        prop_assert!(u.component(1).max_imag() <= 1e-12 * scale);
    }

    #[test]
    fn stress_decomposition_roundtrips(fx in real_field(16), fy in real_field(16)) {
        let pair = DirectionPair::select(&Symbol2::ipm(), 2.0).unwrap();
        let r = VectorField::new(fx, fy);
        let (cj, cb) = pair.decompose(&r);
        let back = pair.recompose(&cj, &cb);
        prop_assert!(back.sub(&r).c0() <= 1e-12 * (1.0 + r.c0()));
    }

    #[test]
    fn resample_roundtrip_is_exact_for_resolved_content(raw in real_field(16)) {
        // drop the conjugate-partnerless Nyquist row, which resample discards
        let f = raw.map_modes(|k, c| {
            if k[0] == -8 || k[1] == -8 { Complex64::ZERO } else { c }
        });
        let fine = Grid::new(64).unwrap();
        let up = f.resample(fine);
        // same function on the finer grid: values at shared points agree
        let n_ratio = 64 / 16;
        for i in 0..16 {
            for j in 0..16 {
                let a = f.values()[i * 16 + j];
                let b = up.values()[(i * n_ratio) * 64 + j * n_ratio];
                prop_assert!((a - b).norm() <= 1e-12);
            }
        }
        let back = up.resample(f.grid());
        prop_assert!(back.sub(&f).c0() <= 1e-12);
    }

    #[test]
    fn divergence_inverse_is_a_right_inverse(f in real_field(32)) {
        let mean = f.mean();
        let f0 = f.sub(&Field::constant(f.grid(), mean));
        let w = inverse_divergence(&f0, None).unwrap();
        let div = w.divergence();
        prop_assert!(div.sub(&f0).c0() <= 1e-10 * (1.0 + f0.c0()));
    }
}
