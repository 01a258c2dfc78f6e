//! Property-based invariants across the toolkit.

use dirac_spectra::clifford::{self, DiracRep};
use dirac_spectra::fields::{self, MagneticSpec, PotentialKind, PotentialSpec};
use dirac_spectra::hardy::{self, EpsilonBundle, Family, Method, Theorem, Verdict};
use dirac_spectra::linalg;
use dirac_spectra::radial3d::{self, assemble, solve, RadialGrid, RadialProblem, SolveMethod, SolveOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_grid() -> RadialGrid {
    RadialGrid { r_min: 1e-2, r_max: 20.0, n: 64, staggered: true }
}

fn sorted_eigenvalues(h: &radial3d::BandedSymmetric) -> Vec<f64> {
    let mut ev: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn coulomb_angular_norm_has_closed_form(nu in -3.0f64..3.0, mu in -3.0f64..3.0, delta in -3.0f64..3.0, seed in any::<u64>()) {
        let rep = DiracRep::new(3).unwrap().to_numeric();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = linalg::random_unit_vector(&mut rng, 3);
        let m = fields::coulomb_angular(&rep, nu, mu, delta, &omega);
        let norm = clifford::operator_norm(&m).unwrap();
        let expect = nu.abs() + (mu * mu + delta * delta).sqrt();
        prop_assert!((norm - expect).abs() <= 1e-12 * expect.max(1.0));
    }

    #[test]
    fn conjugated_representations_stay_clifford(d in 3usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = DiracRep::new(d).unwrap().to_numeric();
        let p = linalg::random_unitary(&mut rng, rep.spinor_size());
        prop_assert!(rep.conjugate(&p).unwrap().clifford_defect() < 1e-12);
    }

    #[test]
    fn potentials_are_hermitian_and_fields_antisymmetric(
        nu in -2.0f64..2.0, mu in -2.0f64..2.0, delta in -2.0f64..2.0,
        a in -1.0f64..1.0, p in 0.0f64..2.0,
        x in prop::array::uniform3(-3.0f64..3.0),
    ) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-4);
        let rep = DiracRep::new(3).unwrap().to_numeric();
        let spec = PotentialSpec::new(3, PotentialKind::MatrixCoulomb { nu, mu, delta }).unwrap();
        let v = fields::eval_potential(&spec, &rep, &x).unwrap();
        prop_assert!(linalg::hermitian_deviation(&v) < 1e-12);
        let b = MagneticSpec::rotational(a, p).unwrap().b(&x).unwrap();
        prop_assert!((&b + b.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn raising_an_epsilon_never_rescues_a_failure(
        eps in prop::array::uniform5(0.0f64..0.5),
        slot in 0usize..5,
        bump in 0.0f64..1.0,
        m in 0.0f64..2.0,
        t in 0usize..5,
    ) {
        let theorem = [Theorem::General, Theorem::Electric, Theorem::Scalar, Theorem::Anomalous, Theorem::Anomalous3d][t];
        let d = 3;
        let base = EpsilonBundle::supplied(eps.map(Some)).unwrap();
        let mut raised = eps;
        raised[slot] += bump;
        let raised = EpsilonBundle::supplied(raised.map(Some)).unwrap();
        let a = hardy::check_theorem(&base, d, m, theorem).unwrap();
        let b = hardy::check_theorem(&raised, d, m, theorem).unwrap();
        prop_assert!(b.lhs >= a.lhs);
        if a.verdict == Verdict::Fails {
            prop_assert_eq!(b.verdict, Verdict::Fails);
        }
    }

    #[test]
    fn critical_coupling_brackets_the_inequality(slope2 in 0.1f64..3.0, slope1 in 0.0f64..2.0) {
        let theorem = Theorem::MasslessElectric;
        let family = Family::Linear { name: "probe".into(), slopes: [slope1, slope2, 0.0, 0.0, 0.0], beta_anticommutes: false };
        let c = hardy::critical_coupling(theorem, 3, 0.0, &family, Method::Auto).unwrap().value;
        let at = |t: f64| hardy::check_theorem(&EpsilonBundle::supplied(family.eps_at(t).map(Some)).unwrap(), 3, 0.0, theorem).unwrap().verdict;
        prop_assert_eq!(at(c * (1.0 - 1e-9)), Verdict::Holds);
        prop_assert_eq!(at(c * (1.0 + 1e-9)), Verdict::Fails);
    }

    #[test]
    fn delta_only_shifts_kappa(kappa in prop::sample::select(vec![-3, -2, -1, 1, 2, 3]), shift in -2i32..=2, delta in -0.9f64..0.9, nu in -0.5f64..0.5) {
        prop_assume!(kappa + shift != 0);
        let a = assemble(&RadialProblem::new(nu, 0.1, delta, 1.0, kappa, small_grid()).unwrap()).unwrap();
        let b = assemble(&RadialProblem::new(nu, 0.1, delta - shift as f64, 1.0, kappa + shift, small_grid()).unwrap()).unwrap();
        for k in 0..=1 {
            for (x, y) in a.h.band(k).iter().zip(b.h.band(k)) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn massless_free_spectrum_is_symmetric(kappa in prop::sample::select(vec![-3, -2, -1, 1, 2, 3]), delta in -0.9f64..0.9) {
        let h = assemble(&RadialProblem::new(0.0, 0.0, delta, 0.0, kappa, small_grid()).unwrap()).unwrap();
        let ev = sorted_eigenvalues(&h.h);
        let worst = ev.iter().zip(ev.iter().rev()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-10, "{}", worst);
    }

    #[test]
    fn spectrum_is_invariant_under_block_conjugation(seed in any::<u64>(), nu in -0.8f64..0.8, mu in -0.5f64..0.5, delta in -0.5f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = assemble(&RadialProblem::new(nu, mu, delta, 1.0, -1, small_grid()).unwrap()).unwrap().h;
        let u = linalg::random_unitary(&mut rng, 2);
        let drift = radial3d::conjugation_invariance_check(&h, &radial3d::block_unitary(&u, h.dim() / 2)).unwrap();
        prop_assert!(drift <= 1e-10, "{}", drift);
    }

    #[test]
    fn window_counts_shrink_and_paths_agree(nu in -0.9f64..0.0, lo in -3.0f64..0.0, hi in 0.0f64..3.0, shrink in 0.0f64..0.5) {
        let h = assemble(&RadialProblem::new(nu, 0.0, 0.0, 1.0, -1, small_grid()).unwrap()).unwrap();
        let count = |w: (f64, f64), method| solve(&h, w, &SolveOptions { method, ..SolveOptions::default() }).unwrap().len();
        let outer = count((lo, hi), SolveMethod::Sturm);
        prop_assert_eq!(outer, count((lo, hi), SolveMethod::Dense));
        let inner = (lo + shrink * (hi - lo) / 2.0, hi - shrink * (hi - lo) / 2.0);
        prop_assert!(count(inner, SolveMethod::Sturm) <= outer);
    }

    #[test]
    fn sommerfeld_levels_are_ordered_below_threshold(nu in -0.99f64..-0.01, kappa in prop::sample::select(vec![-3, -2, -1, 1, 2, 3]), m in 0.1f64..5.0) {
        let e_max = m * (1.0 - 1e-3);
        let levels = radial3d::sommerfeld_levels(nu, kappa, m, e_max).unwrap();
        let first = if kappa > 0 { 1 } else { 0 };
        let ground = radial3d::sommerfeld(nu, kappa, first, m).unwrap();
        prop_assert_eq!(levels.is_empty(), ground > e_max);
        prop_assert!(levels.windows(2).all(|w| w[0].1 < w[1].1));
        prop_assert!(levels.iter().all(|(_, e)| *e > 0.0 && *e < m));
    }
}
