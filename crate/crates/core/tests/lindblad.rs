use hybridmech::linalg::{mat2_max_abs_diff, Mat2};
use hybridmech::lindblad::{
    classify_regime, decompose, diagonalize, effective_thermal, h_matrix, Regime,
};
use hybridmech::oracle::{direct_form_rhs, lindblad_rhs, quadrature_form_rhs, superoperator};
use hybridmech::spectrum::NoiseKernels;
use hybridmech::{Complex, PhysParams};
use nalgebra::Matrix2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn random_inputs(rng: &mut ChaCha8Rng) -> (f64, f64, NoiseKernels<f64>) {
    let gamma_m = if rng.random_bool(0.1) {
        0.0
    } else {
        rng.random_range(0.0..2.0)
    };
    let n_m = rng.random_range(0.0..10.0);
    let s0 = rng.random_range(0.0..1.0);
    let s2 = C::from_polar(
        s0 * rng.random_range(0.0..1.0f64),
        rng.random_range(-3.2..3.2),
    );
    (gamma_m, n_m, NoiseKernels::fixed(s0, s2))
}

fn projector(v: &[C; 2]) -> Mat2<f64> {
    [
        [v[0] * v[0].conj(), v[0] * v[1].conj()],
        [v[1] * v[0].conj(), v[1] * v[1].conj()],
    ]
}

#[test]
fn closed_form_eigenpairs_match_generic_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let (gm, nm, k) = random_inputs(&mut rng);
        let h = h_matrix(gm, nm, &k);
        let d = diagonalize(&h).unwrap();
        let scale = h[0][0].re.max(1e-300);
        let eig = Matrix2::from_fn(|i, j| h[i][j]).symmetric_eigen();
        let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
            (0, 1)
        } else {
            (1, 0)
        };
        assert!((d.lambda_plus - eig.eigenvalues[hi]).abs() <= 1e-12 * scale);
        assert!((d.lambda_minus - eig.eigenvalues[lo]).abs() <= 1e-12 * scale);
        assert!(d.lambda_minus >= 0.0);
        let gap = d.lambda_plus - d.lambda_minus;
        if gap > 1e-3 * scale {
            for (idx, v) in [(hi, d.v_plus), (lo, d.v_minus)] {
                let col = eig.eigenvectors.column(idx);
                let reference = projector(&[col[0], col[1]]);
                let err = mat2_max_abs_diff(&projector(&v), &reference);
                assert!(
                    err <= 1e-12 * scale / gap.min(scale),
                    "projector error {err}, gap {gap}"
                );
            }
        }
        assert!(mat2_max_abs_diff(&d.reconstruct(), &h) <= 1e-12 * scale);
    }
}

fn max_entry_diff(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn channel_form_equals_direct_form_on_fock_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let (gm, nm, k) = random_inputs(&mut rng);
        let p = PhysParams::new(1.0, 0.3)
            .with_drive(1.0, 0.0)
            .with_coupling(0.02)
            .with_mechanical_bath(gm, nm);
        let d = decompose(gm, nm, &k).unwrap();
        let t = rng.random_range(0.0..50.0);
        let a = superoperator(10, t, |r| lindblad_rhs(r, 0.3, &d, &p));
        let b = superoperator(10, t, |r| direct_form_rhs(r, 0.3, &p, &k));
        let err = max_entry_diff(&a, &b);
        assert!(err <= 1e-10, "difference {err}");
    }
}

#[test]
fn double_commutator_form_without_bath() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let (_, _, k) = random_inputs(&mut rng);
        let p = PhysParams::new(1.0, 0.3)
            .with_drive(1.0, 0.0)
            .with_coupling(0.02);
        let d = decompose(0.0, 0.0, &k).unwrap();
        let t = rng.random_range(0.0..50.0);
        let a = superoperator(10, t, |r| lindblad_rhs(r, 0.2, &d, &p));
        let b = superoperator(10, t, |r| {
            quadrature_form_rhs(r, 0.2, &p, d.lambda_plus, d.lambda_minus, d.theta).unwrap()
        });
        let err = max_entry_diff(&a, &b);
        assert!(err <= 1e-10, "difference {err}");
    }
    let p = PhysParams::new(1.0, 0.3).with_mechanical_bath(0.1, 1.0);
    let rho = hybridmech::oracle::FockDensityMatrix::fock(4, 1);
    assert!(quadrature_form_rhs(&rho, 0.0, &p, 1.0, 0.5, 0.0).is_err());
}

#[test]
fn weak_noise_channel_is_nearly_annihilation() {
    for phase in [0.0, 1.0, -2.5] {
        let s2 = C::from_polar(1e-4, phase);
        let d = decompose(1.0, 0.5, &NoiseKernels::fixed(2e-4, s2)).unwrap();
        let ratio = d.v_plus[1] / d.v_plus[0];
        assert!((ratio - s2.conj()).norm() < 1e-11);
    }
}

#[test]
fn effective_bath_limits() {
    let (g, n) = effective_thermal(0.5, 2.0, &NoiseKernels::fixed(0.01, C::new(0.0, 0.0))).unwrap();
    assert_eq!(g, 0.5);
    assert!((n - 2.02).abs() < 1e-15);
    let (g, n) = effective_thermal(0.5, 2.0, &NoiseKernels::zero()).unwrap();
    assert_eq!((g, n), (0.5, 2.0));
    assert!(effective_thermal(0.0, 2.0, &NoiseKernels::zero()).is_err());
}

#[test]
fn regime_examples() {
    let base = PhysParams::new(1.0, 0.01).with_coupling(0.1);
    let rate = base.tls_noise_rate();
    assert_eq!(
        classify_regime(&base.with_mechanical_bath(rate / 10.0, 0.0)).regime,
        Regime::TlsInduced
    );
    assert_eq!(
        classify_regime(&base.with_mechanical_bath(rate, 1.0)).regime,
        Regime::TlsInduced
    );
    assert_eq!(
        classify_regime(&base.with_mechanical_bath(2.0 * rate, 1.0)).regime,
        Regime::EffectiveThermal
    );
    assert_eq!(
        classify_regime(&base.with_mechanical_bath(2.0 * rate, 1.5)).regime,
        Regime::Thermal
    );
    assert_eq!(
        classify_regime(&base.with_mechanical_bath(rate / 2.0, 4.0)).regime,
        Regime::Thermal
    );
}

proptest! {
    #[test]
    fn valid_kernels_give_completely_positive_channels(
        gm in 0.0f64..5.0,
        nm in 0.0f64..100.0,
        s0 in 0.0f64..5.0,
        frac in 0.0f64..=1.0,
        phase in -3.2f64..3.2,
    ) {
        let k = NoiseKernels::fixed(s0, C::from_polar(s0 * frac, phase));
        let d = decompose(gm, nm, &k).unwrap();
        prop_assert!(d.lambda_minus >= 0.0);
        prop_assert!(d.lambda_plus >= d.lambda_minus);
        let h = h_matrix(gm, nm, &k);
        let scale = h[0][0].re.max(1e-300);
        prop_assert!(mat2_max_abs_diff(&d.reconstruct(), &h) <= 1e-12 * scale);
        prop_assert!((d.damping() - gm).abs() <= 1e-12 * scale);
        for v in [d.v_plus, d.v_minus] {
            prop_assert!((v[0].norm_sqr() + v[1].norm_sqr() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn classification_ignores_a_common_rate_scale(
        gm in 1e-4f64..1.0,
        gamma_m in 1e-8f64..1e-2,
        nm in 0.0f64..1e4,
        scale in 1e-3f64..1e6,
    ) {
        let p = PhysParams::new(1.0, 0.01).with_coupling(gm).with_mechanical_bath(gamma_m, nm);
        let mut q = p;
        q.gamma *= scale;
        q.omega *= scale;
        q.g_m *= scale;
        q.gamma_m *= scale;
        prop_assert_eq!(classify_regime(&p).regime, classify_regime(&q).regime);
    }
}
