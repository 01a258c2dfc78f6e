//! Partial-wave radial Dirac spectra for Coulomb-type potentials `νI + μβ + iδβ(α·x/|x|)` in d = 3.
//!
//! The staggered logarithmic grid gives a tridiagonal matrix without doubler branches; eigenpairs
//! come from Sturm bisection and inverse iteration. A refinement study over grid and domain doubling
//! separates persistent eigenvalues from discretization artifacts, and [`sommerfeld`] provides the
//! closed-form Coulomb levels for comparison.

pub mod banded;
pub mod oracle;
pub mod problem;
pub mod solve;
pub mod study;

pub use banded::BandedSymmetric;
pub use oracle::{compare_with_oracle, sommerfeld, sommerfeld_levels, OracleMatch};
pub use problem::{assemble, RadialGrid, RadialMatrix, RadialProblem, GAP_MARGIN};
pub use solve::{solve, SolveMethod, SolveOptions, SpectrumResult};
pub use study::{
    block_unitary, component_swap, conjugation_invariance_check, refinement_study, sweep, write_csv, PersistenceCriteria, RefinementStudy, RefinementVerdict,
    SpectrumRow,
};

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, r_max: f64) -> RadialGrid {
        RadialGrid { r_min: 1e-4, r_max, n, staggered: true }
    }

    #[test]
    fn coulomb_levels_match_oracle() {
        let p = RadialProblem::new(-0.5, 0.0, 0.0, 1.0, -1, grid(1024, 60.0)).unwrap();
        let s = solve(&assemble(&p).unwrap(), (-0.999, 0.999), &SolveOptions::default()).unwrap();
        for n_r in 0..2 {
            let e = sommerfeld(-0.5, -1, n_r, 1.0).unwrap();
            let near = s.eigenvalues.iter().map(|l| (l - e).abs()).fold(f64::INFINITY, f64::min);
            assert!(near / e < 1e-4, "n_r = {n_r}: {:?}", s.eigenvalues);
        }
    }

    #[test]
    fn positive_kappa_channel_matches_oracle() {
        let p = RadialProblem::new(-0.5, 0.0, 0.0, 1.0, 1, grid(1024, 80.0)).unwrap();
        let s = solve(&assemble(&p).unwrap(), (-0.999, 0.999), &SolveOptions::default()).unwrap();
        let e = sommerfeld(-0.5, 1, 1, 1.0).unwrap();
        assert!((s.eigenvalues[0] - e).abs() / e < 1e-4, "{} vs {e}", s.eigenvalues[0]);
    }

    #[test]
    fn massless_free_spectrum_is_symmetric() {
        for delta in [0.0, 0.4] {
            let p = RadialProblem::new(0.0, 0.0, delta, 0.0, -2, RadialGrid { r_min: 1e-2, r_max: 20.0, n: 128, staggered: true }).unwrap();
            let h = assemble(&p).unwrap();
            let ev: Vec<f64> = h.h.to_dense().symmetric_eigenvalues().iter().copied().collect();
            let mut ev = ev;
            ev.sort_by(f64::total_cmp);
            let worst = ev.iter().zip(ev.iter().rev()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-10, "{worst}");
        }
    }

    #[test]
    fn coulomb_term_breaks_the_symmetry() {
        let p = RadialProblem::new(0.3, 0.0, 0.0, 0.0, -1, RadialGrid { r_min: 1e-2, r_max: 20.0, n: 128, staggered: true }).unwrap();
        let mut ev: Vec<f64> = assemble(&p).unwrap().h.to_dense().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let worst = ev.iter().zip(ev.iter().rev()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn gap_states_do_not_double_under_refinement() {
        let count = |n: usize| {
            let p = RadialProblem::new(-0.5, 0.0, 0.0, 1.0, -1, grid(n, 60.0)).unwrap();
            solve(&assemble(&p).unwrap(), (-0.999, 0.999), &SolveOptions::default()).unwrap().in_gap.len()
        };
        let (a, b) = (count(512), count(1024));
        assert!(a > 0);
        assert_eq!(a, b);
    }

    #[test]
    fn ground_state_is_persistent() {
        let p = RadialProblem::new(-0.5, 0.0, 0.0, 1.0, -1, grid(1024, 60.0)).unwrap();
        let study = refinement_study(&p, p.gap_window(), &PersistenceCriteria::default(), &SolveOptions::default()).unwrap();
        let found = study.persistent_in_gap();
        assert!((found[0] - 0.75f64.sqrt()).abs() < 1e-4, "{found:?}");
    }

    #[test]
    fn free_massive_operator_has_no_persistent_states() {
        let p = RadialProblem::new(0.0, 0.0, 0.0, 1.0, -1, grid(512, 60.0)).unwrap();
        let study = refinement_study(&p, p.gap_window(), &PersistenceCriteria::default(), &SolveOptions::default()).unwrap();
        assert_eq!(study.persistent().count(), 0);
    }
}
