//! Property suites over random operators: tensor algebra identities,
//! twirl projections, and basis completeness.

use discrim_core::haar::{collective_pair_twirl, conjugate_local, one_register_twirl, sample_haar_su2, RngStream};
use discrim_core::irrep::{three_qubit_basis, two_qubit_basis};
use discrim_core::tensor::{C64, CMatrix, LabeledOperator, RegisterLabel, SystemLayout};
use proptest::prelude::*;

fn register_strategy() -> impl Strategy<Value = RegisterLabel> {
    prop::sample::select(RegisterLabel::ALL.to_vec())
}

/// Random Hermitian operator on a random subset of registers.
fn hermitian_strategy(n: usize) -> impl Strategy<Value = LabeledOperator> {
    (
        prop::sample::subsequence(RegisterLabel::ALL.to_vec(), n..=n),
        prop::collection::vec(-1.0f64..1.0, (1 << n) * (1 << n) * 2),
    )
        .prop_map(move |(regs, vals)| {
            let side = 1 << n;
            let mut m = CMatrix::zeros(side, side);
            let mut k = 0;
            for r in 0..side {
                for c in r..side {
                    let re = vals[k];
                    let im = if r == c { 0.0 } else { vals[k + 1] };
                    m[(r, c)] = C64::new(re, im);
                    m[(c, r)] = C64::new(re, -im);
                    k += 2;
                }
            }
            LabeledOperator::new(SystemLayout::new(regs).unwrap(), m).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partial_trace_of_kron_factorizes(a in hermitian_strategy(2), b in hermitian_strategy(2)) {
        prop_assume!(a.layout().registers().iter().all(|r| !b.layout().registers().contains(r)));
        let prod = a.kron(&b).unwrap();
        let traced = prod.partial_trace(b.layout().registers()).unwrap();
        let expected = a.scale(b.trace().re);
        prop_assert!(traced.frobenius_distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace(x in hermitian_strategy(3), r in register_strategy()) {
        prop_assume!(x.layout().registers().contains(&r));
        let t = x.partial_trace(&[r]).unwrap();
        prop_assert!((t.trace() - x.trace()).norm() < 1e-12);
    }

    #[test]
    fn permutation_preserves_spectrum(x in hermitian_strategy(3)) {
        let regs = x.layout().registers().to_vec();
        let map = [(regs[0], regs[1]), (regs[1], regs[2]), (regs[2], regs[0])];
        let y = x.permute_registers(&map).unwrap();
        let ex = x.hermitian_eigenvalues().unwrap();
        let ey = y.hermitian_eigenvalues().unwrap();
        for (u, v) in ex.iter().zip(ey.iter()) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_psd_is_psd(x in hermitian_strategy(3), r in register_strategy()) {
        prop_assume!(x.layout().registers().contains(&r));
        // square it to get a PSD operator
        let sq = LabeledOperator::new(
            x.layout().clone(),
            x.matrix() * x.matrix(),
        ).unwrap();
        let t = sq.partial_trace(&[r]).unwrap();
        prop_assert!(t.min_eigenvalue().unwrap() >= -1e-10);
    }

    #[test]
    fn one_register_twirl_is_idempotent_and_trace_preserving(
        x in hermitian_strategy(3),
        r in register_strategy(),
    ) {
        prop_assume!(x.layout().registers().contains(&r));
        let once = one_register_twirl(&x, r).unwrap();
        let twice = one_register_twirl(&once, r).unwrap();
        prop_assert!(twice.frobenius_distance(&once).unwrap() < 1e-10);
        prop_assert!((once.trace() - x.trace()).norm() < 1e-12);
    }

    #[test]
    fn collective_twirl_is_idempotent_projection(x in hermitian_strategy(3)) {
        let regs = x.layout().registers().to_vec();
        let (r, s) = (regs[0], regs[1]);
        let once = collective_pair_twirl(&x, r, s).unwrap();
        let twice = collective_pair_twirl(&once, r, s).unwrap();
        prop_assert!(twice.frobenius_distance(&once).unwrap() < 1e-10);
        prop_assert!((once.trace() - x.trace()).norm() < 1e-12);
        // projection: output is closer to x than any further twirl step
        prop_assert!(once.is_hermitian());
    }

    #[test]
    fn collective_twirl_output_is_invariant(x in hermitian_strategy(3), seed in 0u64..1000) {
        let regs = x.layout().registers().to_vec();
        let (r, s) = (regs[0], regs[1]);
        let t = collective_pair_twirl(&x, r, s).unwrap();
        let mut stream = RngStream::from_seed(seed);
        let u = sample_haar_su2(&mut stream);
        let conj = conjugate_local(&conjugate_local(&t, &u, r).unwrap(), &u, s).unwrap();
        prop_assert!(conj.frobenius_distance(&t).unwrap() < 1e-10);
    }
}

#[test]
fn basis_completeness() {
    use RegisterLabel::*;
    let b3 = three_qubit_basis(&[R1, R3, R5]).unwrap();
    let mut sum = CMatrix::zeros(8, 8);
    for v in b3.doublet.iter().flatten().chain(b3.quartet.iter()) {
        sum += v * v.adjoint();
    }
    assert!((sum - CMatrix::identity(8, 8)).norm() < 1e-12);

    let b2 = two_qubit_basis(&[R2b, R4b]).unwrap();
    let mut sum = CMatrix::zeros(4, 4);
    for v in std::iter::once(&b2.singlet).chain(b2.triplet.iter()) {
        sum += v * v.adjoint();
    }
    assert!((sum - CMatrix::identity(4, 4)).norm() < 1e-12);
}
