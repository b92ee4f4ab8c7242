use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qtransfer::matrix::{rel_residual, CMat, MatrixDump};
use qtransfer::operators::ybe_residual;
use qtransfer::transfer::{qop_p, transfer_p, Aux, ChainSpec};
use qtransfer::{ModelParams, SpectralPoint};

fn cplx(range: f64) -> impl Strategy<Value = C64> {
    (-range..range, -range..range).prop_map(|(re, im)| C64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn yang_baxter_holds_anywhere(u1 in cplx(1.5), u2 in cplx(1.5), u3 in cplx(1.5)) {
        let p = ModelParams::default();
        prop_assert!(ybe_residual(u1, u2, u3, &p).unwrap() < 1e-11);
    }

    #[test]
    fn common_shift_is_invisible(u in cplx(0.5), d in cplx(0.8), v in -0.3f64..0.3) {
        let p = ModelParams::default();
        let ch = ChainSpec::from_real(&[0.0, v]).unwrap();
        let x = SpectralPoint::new(u);
        let t = |x: SpectralPoint, ch: &ChainSpec| transfer_p(C64::new(1.0, 0.0), x, ch, &p, Aux::Finite).unwrap();
        prop_assert!(rel_residual(&t(x, &ch), &t(x.shifted(d), &ch.shifted(d))) < 1e-11);
        let a = qop_p(x, &ch, &p, true).unwrap();
        let b = qop_p(x.shifted(d), &ch.shifted(d), &p, true).unwrap();
        prop_assert!(rel_residual(&a, &b) < 1e-11);
    }

    #[test]
    fn matrix_dump_round_trips(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let m = CMat::from_fn(rows, cols, |i, j| {
            let k = (seed ^ ((i * 31 + j) as u64)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            C64::new(f64::from_bits(k >> 12 | 0x3ff0_0000_0000_0000) - 1.5, (k as f64).sqrt() * 1e-7)
        });
        let back = MatrixDump::from_json(&MatrixDump::from_matrix(&m).to_json()).unwrap().to_matrix().unwrap();
        prop_assert_eq!(m, back);
    }
}
