//! Haar sampling on SU(2), exact one-register and collective two-register
//! twirls, and the three averaged Choi operators.
//!
//! The collective twirl is evaluated analytically through the commutant of
//! `{U (x) U}` (spanned by identity and swap); Monte Carlo averaging is kept
//! only as an independent oracle.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::tensor::{C64, CMatrix, LabeledOperator, RegisterLabel, SystemLayout, max_entangled};

/// A seedable, splittable pseudorandom stream.  Substreams are derived by
/// stream index, so parallel consumers stay reproducible for a fixed seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
    seed: u64,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        RngStream { rng: ChaCha12Rng::seed_from_u64(seed), seed }
    }

    /// Independent substream `index`; substreams never overlap the parent
    /// stream (which runs on stream id 0) or each other.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(index.wrapping_add(1));
        RngStream { rng, seed: self.seed }
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

/// A special unitary 2x2 matrix drawn from (or checked against) SU(2).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitarySample {
    mat: Matrix2<C64>,
}

impl UnitarySample {
    pub fn identity() -> Self {
        UnitarySample { mat: Matrix2::identity() }
    }

    /// From a unit quaternion (a, b, c, d).
    pub fn from_quaternion(a: f64, b: f64, c: f64, d: f64) -> Self {
        let mat = Matrix2::new(
            C64::new(a, b),
            C64::new(c, d),
            C64::new(-c, d),
            C64::new(a, -b),
        );
        UnitarySample { mat }
    }

    /// Wraps a matrix the caller knows to be (special) unitary, e.g. a
    /// product of samples.
    pub fn from_matrix_unchecked(mat: Matrix2<C64>) -> Self {
        UnitarySample { mat }
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.mat
    }

    pub fn determinant(&self) -> C64 {
        self.mat[(0, 0)] * self.mat[(1, 1)] - self.mat[(0, 1)] * self.mat[(1, 0)]
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.mat.adjoint() * self.mat - Matrix2::<C64>::identity()).norm()
    }
}

/// Haar-uniform sample on SU(2): four standard normals normalized to a unit
/// quaternion.
pub fn sample_haar_su2(stream: &mut RngStream) -> UnitarySample {
    loop {
        let (a, b, c, d) = (stream.normal(), stream.normal(), stream.normal(), stream.normal());
        let n = (a * a + b * b + c * c + d * d).sqrt();
        if n > 1e-12 {
            return UnitarySample::from_quaternion(a / n, b / n, c / n, d / n);
        }
    }
}

/// In-place left multiplication by a single-qubit gate acting on register
/// position `pos` of an n-register matrix.
fn apply_left(mat: &mut CMatrix, u: &Matrix2<C64>, pos: usize, n: usize) {
    let side = 1 << n;
    let bit = n - 1 - pos;
    let mask = 1usize << bit;
    for r in 0..side {
        if r & mask != 0 {
            continue;
        }
        let r1 = r | mask;
        for c in 0..side {
            let x0 = mat[(r, c)];
            let x1 = mat[(r1, c)];
            mat[(r, c)] = u[(0, 0)] * x0 + u[(0, 1)] * x1;
            mat[(r1, c)] = u[(1, 0)] * x0 + u[(1, 1)] * x1;
        }
    }
}

/// In-place right multiplication by the adjoint of a single-qubit gate.
fn apply_right_dagger(mat: &mut CMatrix, u: &Matrix2<C64>, pos: usize, n: usize) {
    let side = 1 << n;
    let bit = n - 1 - pos;
    let mask = 1usize << bit;
    // (X U†)[r,c] = X[r,c0] conj(U[c,0-part]) ... column pairs
    for c in 0..side {
        if c & mask != 0 {
            continue;
        }
        let c1 = c | mask;
        for r in 0..side {
            let x0 = mat[(r, c)];
            let x1 = mat[(r, c1)];
            mat[(r, c)] = x0 * u[(0, 0)].conj() + x1 * u[(0, 1)].conj();
            mat[(r, c1)] = x0 * u[(1, 0)].conj() + x1 * u[(1, 1)].conj();
        }
    }
}

/// Conjugates `x` by `U` on register `r`: `(I..U..I) x (I..U†..I)`.
pub fn conjugate_local(
    x: &LabeledOperator,
    u: &UnitarySample,
    r: RegisterLabel,
) -> Result<LabeledOperator> {
    let pos = x.layout().position(r)?;
    let n = x.layout().len();
    let mut mat = x.matrix().clone();
    apply_left(&mut mat, u.matrix(), pos, n);
    apply_right_dagger(&mut mat, u.matrix(), pos, n);
    LabeledOperator::new(x.layout().clone(), mat)
}

/// Haar average of local conjugation on one register: replaces the register
/// marginal by the maximally mixed state,
/// `x -> (I_r / 2) (x) tr_r(x)`, reassembled at `r`'s original position.
pub fn one_register_twirl(x: &LabeledOperator, r: RegisterLabel) -> Result<LabeledOperator> {
    x.layout().position(r)?;
    let rest = x.partial_trace(&[r])?;
    let half = LabeledOperator::identity(SystemLayout::new(vec![r])?).scale(0.5);
    half.kron(&rest)?.reorder(x.layout())
}

fn swap_matrix_on_pair(n: usize) -> CMatrix {
    // swap of the first two registers, identity on the rest
    let side = 1 << n;
    let mut s = CMatrix::zeros(side, side);
    let b0 = n - 1;
    let b1 = n - 2;
    for c in 0..side {
        let hi = (c >> b0) & 1;
        let lo = (c >> b1) & 1;
        let r = (c & !((1 << b0) | (1 << b1))) | (lo << b0) | (hi << b1);
        s[(r, c)] = C64::new(1.0, 0.0);
    }
    s
}

/// Haar average of simultaneous conjugation by the same unitary on registers
/// `r` and `s`, evaluated exactly in the commutant of `{U (x) U}`:
/// with swap `S` on the pair and Gram matrix `[[4,2],[2,4]]`,
/// `G_I = (2 tr_P(x) - tr_P(S x)) / 6`, `G_S = (2 tr_P(S x) - tr_P(x)) / 6`,
/// and the result is `I (x) G_I + S (x) G_S`.
pub fn collective_pair_twirl(
    x: &LabeledOperator,
    r: RegisterLabel,
    s: RegisterLabel,
) -> Result<LabeledOperator> {
    x.layout().position(r)?;
    x.layout().position(s)?;
    let n = x.layout().len();
    // move the pair in front
    let mut order = vec![r, s];
    for &q in x.layout().registers() {
        if q != r && q != s {
            order.push(q);
        }
    }
    let front_layout = SystemLayout::new(order)?;
    let xp = x.reorder(&front_layout)?;
    let swap = swap_matrix_on_pair(n);
    let sx = LabeledOperator::new(front_layout.clone(), &swap * xp.matrix())?;

    let tr_p = xp.partial_trace(&[r, s])?;
    let tr_sp = sx.partial_trace(&[r, s])?;
    let g_i = tr_p.scale(2.0 / 6.0).sub(&tr_sp.scale(1.0 / 6.0))?;
    let g_s = tr_sp.scale(2.0 / 6.0).sub(&tr_p.scale(1.0 / 6.0))?;

    let pair_layout = SystemLayout::new(vec![r, s])?;
    let id_pair = LabeledOperator::identity(pair_layout.clone());
    let swap_pair = LabeledOperator::new(pair_layout, swap_matrix_on_pair(2))?;
    let out = id_pair.kron(&g_i)?.add(&swap_pair.kron(&g_s)?)?;
    out.reorder(x.layout())
}

/// Which two gate slots receive the shared (collective) unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MVariant {
    /// Collective on slots (1, 3), independent on 5.
    M1,
    /// Collective on slots (1, 5), independent on 3.
    M2,
    /// Collective on slots (3, 5), independent on 1.
    M3,
}

impl MVariant {
    pub const ALL: [MVariant; 3] = [MVariant::M1, MVariant::M2, MVariant::M3];

    pub fn from_index(j: u8) -> Option<Self> {
        match j {
            1 => Some(MVariant::M1),
            2 => Some(MVariant::M2),
            3 => Some(MVariant::M3),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            MVariant::M1 => 1,
            MVariant::M2 => 2,
            MVariant::M3 => 3,
        }
    }

    pub fn collective_pair(self) -> (RegisterLabel, RegisterLabel) {
        match self {
            MVariant::M1 => (RegisterLabel::R1, RegisterLabel::R3),
            MVariant::M2 => (RegisterLabel::R1, RegisterLabel::R5),
            MVariant::M3 => (RegisterLabel::R3, RegisterLabel::R5),
        }
    }

    pub fn independent(self) -> RegisterLabel {
        match self {
            MVariant::M1 => RegisterLabel::R5,
            MVariant::M2 => RegisterLabel::R3,
            MVariant::M3 => RegisterLabel::R1,
        }
    }
}

/// `phi+_{1,2b} (x) phi+_{3,4b} (x) phi+_{5,6b}` on the canonical layout.
pub fn entangled_triple() -> LabeledOperator {
    use RegisterLabel::*;
    max_entangled(R1, R2b)
        .unwrap()
        .kron(&max_entangled(R3, R4b).unwrap())
        .unwrap()
        .kron(&max_entangled(R5, R6b).unwrap())
        .unwrap()
}

/// The Haar-averaged Choi operator for a variant: collective twirl on the
/// shared pair, one-register twirl on the independent slot.  64x64, PSD,
/// trace 8, canonical layout.
pub fn build_m(v: MVariant) -> LabeledOperator {
    let (r, s) = v.collective_pair();
    let x = entangled_triple();
    let x = collective_pair_twirl(&x, r, s).expect("canonical registers");
    one_register_twirl(&x, v.independent()).expect("canonical register")
}

/// Monte Carlo oracle for [`build_m`]: empirical average over independent
/// Haar pairs (U shared on the collective slots, V on the independent slot).
///
/// Trials are partitioned into fixed-size chunks; each chunk is summed
/// sequentially and chunk sums are combined in index order, so the result is
/// identical for any worker count.
pub fn monte_carlo_m(v: MVariant, trials: u64, seed: u64) -> LabeledOperator {
    let (r, s) = v.collective_pair();
    let ind = v.independent();
    let base = entangled_triple();
    let layout = base.layout().clone();
    let pos_r = layout.position(r).unwrap();
    let pos_s = layout.position(s).unwrap();
    let pos_i = layout.position(ind).unwrap();
    let root = RngStream::from_seed(seed);

    const CHUNK: u64 = 512;
    let n_chunks = trials.div_ceil(CHUNK);
    let chunk_sums: Vec<CMatrix> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(trials);
            let mut acc = CMatrix::zeros(64, 64);
            for trial in lo..hi {
                let mut stream = root.substream(trial);
                let u = sample_haar_su2(&mut stream);
                let w = sample_haar_su2(&mut stream);
                let mut m = base.matrix().clone();
                apply_left(&mut m, u.matrix(), pos_r, 6);
                apply_left(&mut m, u.matrix(), pos_s, 6);
                apply_left(&mut m, w.matrix(), pos_i, 6);
                apply_right_dagger(&mut m, u.matrix(), pos_r, 6);
                apply_right_dagger(&mut m, u.matrix(), pos_s, 6);
                apply_right_dagger(&mut m, w.matrix(), pos_i, 6);
                acc += m;
            }
            acc
        })
        .collect();

    let mut total = CMatrix::zeros(64, 64);
    for s in chunk_sums {
        total += s;
    }
    total /= C64::new(trials as f64, 0.0);
    LabeledOperator::new(layout, total).unwrap()
}

/// Overlap `<psi-| A (x) B |psi->` for 2x2 matrices.
pub fn singlet_overlap(a: &Matrix2<C64>, b: &Matrix2<C64>) -> C64 {
    (a[(0, 0)] * b[(1, 1)] - a[(0, 1)] * b[(1, 0)] - a[(1, 0)] * b[(0, 1)]
        + a[(1, 1)] * b[(0, 0)])
        * C64::new(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::singlet_projector;
    use approx::assert_abs_diff_eq;
    use RegisterLabel::*;

    #[test]
    fn haar_samples_are_special_unitary() {
        let mut s = RngStream::from_seed(11);
        for _ in 0..200 {
            let u = sample_haar_su2(&mut s);
            assert!(u.unitarity_defect() < 1e-12);
            assert!((u.determinant() - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn haar_first_moment_vanishes() {
        let mut s = RngStream::from_seed(5);
        let n = 100_000;
        let mut mean = Matrix2::<C64>::zeros();
        for _ in 0..n {
            mean += sample_haar_su2(&mut s).mat;
        }
        mean /= C64::new(n as f64, 0.0);
        // entry std error ~ 1/(2 sqrt(n)); allow 5 sigma
        let se = 5.0 / (2.0 * (n as f64).sqrt());
        for z in mean.iter() {
            assert!(z.norm() < se, "entry {z} exceeds {se}");
        }
    }

    #[test]
    fn haar_character_moment() {
        // E |tr U|^2 = 1 for the defining irrep
        let mut s = RngStream::from_seed(19);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let u = sample_haar_su2(&mut s);
            acc += (u.mat[(0, 0)] + u.mat[(1, 1)]).norm_sqr();
        }
        assert_abs_diff_eq!(acc / n as f64, 1.0, epsilon = 0.02);
    }

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let root = RngStream::from_seed(42);
        let a1 = sample_haar_su2(&mut root.substream(0));
        let a2 = sample_haar_su2(&mut root.substream(0));
        let b = sample_haar_su2(&mut root.substream(1));
        assert_eq!(a1, a2);
        assert!((a1.mat - b.mat).norm() > 1e-6);
    }

    #[test]
    fn conjugate_local_basics() {
        let phi = max_entangled(R1, R2b).unwrap();
        let id = UnitarySample::identity();
        assert!(conjugate_local(&phi, &id, R1)
            .unwrap()
            .frobenius_distance(&phi)
            .unwrap()
            .abs()
            < 1e-15);

        let mut s = RngStream::from_seed(3);
        let u = sample_haar_su2(&mut s);
        let once = conjugate_local(&phi, &u, R1).unwrap();
        assert_abs_diff_eq!(once.trace().re, phi.trace().re, epsilon = 1e-12);
        let udag = UnitarySample { mat: u.mat.adjoint() };
        let back = conjugate_local(&once, &udag, R1).unwrap();
        assert!(back.frobenius_distance(&phi).unwrap() < 1e-12);
        assert!(conjugate_local(&phi, &u, R5).is_err());
    }

    #[test]
    fn one_register_twirl_of_phi_is_mixed() {
        let phi = max_entangled(R5, R6b).unwrap();
        let t = one_register_twirl(&phi, R5).unwrap();
        let expected = LabeledOperator::identity(phi.layout().clone()).scale(0.5);
        assert!(t.frobenius_distance(&expected).unwrap() < 1e-14);
        let id = LabeledOperator::identity(SystemLayout::new(vec![R1, R3]).unwrap());
        assert!(one_register_twirl(&id, R3).unwrap().frobenius_distance(&id).unwrap() < 1e-14);
    }

    #[test]
    fn one_register_twirl_matches_monte_carlo() {
        let phi = max_entangled(R5, R6b).unwrap();
        let exact = one_register_twirl(&phi, R5).unwrap();
        let mut s = RngStream::from_seed(23);
        let n = 100_000;
        let mut acc = CMatrix::zeros(4, 4);
        for _ in 0..n {
            let u = sample_haar_su2(&mut s);
            acc += conjugate_local(&phi, &u, R5).unwrap().matrix();
        }
        acc /= C64::new(n as f64, 0.0);
        let mc = LabeledOperator::new(phi.layout().clone(), acc).unwrap();
        assert!(mc.frobenius_distance(&exact).unwrap() <= 0.02);
    }

    #[test]
    fn collective_twirl_fixes_identity_and_swap() {
        let layout = SystemLayout::new(vec![R1, R3]).unwrap();
        let id = LabeledOperator::identity(layout.clone());
        assert!(collective_pair_twirl(&id, R1, R3)
            .unwrap()
            .frobenius_distance(&id)
            .unwrap()
            < 1e-14);
        let swap = LabeledOperator::new(layout, swap_matrix_on_pair(2)).unwrap();
        assert!(collective_pair_twirl(&swap, R1, R3)
            .unwrap()
            .frobenius_distance(&swap)
            .unwrap()
            < 1e-14);
    }

    #[test]
    fn collective_twirl_matches_monte_carlo() {
        let x = max_entangled(R1, R2b)
            .unwrap()
            .kron(&max_entangled(R3, R4b).unwrap())
            .unwrap();
        let exact = collective_pair_twirl(&x, R1, R3).unwrap();
        let mut s = RngStream::from_seed(7);
        let n = 100_000;
        let mut acc = CMatrix::zeros(16, 16);
        for _ in 0..n {
            let u = sample_haar_su2(&mut s);
            let y = conjugate_local(&x, &u, R1).unwrap();
            let y = conjugate_local(&y, &u, R3).unwrap();
            acc += y.matrix();
        }
        acc /= C64::new(n as f64, 0.0);
        let mc = LabeledOperator::new(x.layout().clone(), acc).unwrap();
        assert!(mc.frobenius_distance(&exact).unwrap() <= 0.02);
    }

    #[test]
    fn collective_twirl_is_idempotent() {
        let x = entangled_triple();
        let once = collective_pair_twirl(&x, R1, R3).unwrap();
        let twice = collective_pair_twirl(&once, R1, R3).unwrap();
        assert!(twice.frobenius_distance(&once).unwrap() < 1e-12);
    }

    #[test]
    fn twirl_output_commutes_with_collective_conjugation() {
        let x = entangled_triple();
        let t = collective_pair_twirl(&x, R1, R3).unwrap();
        let mut s = RngStream::from_seed(99);
        for _ in 0..100 {
            let u = sample_haar_su2(&mut s);
            let conj = conjugate_local(&conjugate_local(&t, &u, R1).unwrap(), &u, R3).unwrap();
            assert!(conj.frobenius_distance(&t).unwrap() < 1e-10);
        }
    }

    #[test]
    fn one_register_twirl_marginal_is_maximally_mixed() {
        let x = entangled_triple();
        let t = one_register_twirl(&x, R5).unwrap();
        let others: Vec<RegisterLabel> =
            RegisterLabel::ALL.iter().copied().filter(|&r| r != R5).collect();
        let marginal = t.partial_trace(&others).unwrap();
        let expected = LabeledOperator::identity(SystemLayout::new(vec![R5]).unwrap())
            .scale(x.trace().re / 2.0);
        assert!(marginal.frobenius_distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn build_m_traces_and_fixed_points() {
        for v in MVariant::ALL {
            let m = build_m(v);
            assert_abs_diff_eq!(m.trace().re, 8.0, epsilon = 1e-10);
            assert!(m.is_hermitian());
            assert!(m.is_psd(1e-9).unwrap());
            // re-applying the defining twirls leaves it unchanged
            let (r, s) = v.collective_pair();
            let again = one_register_twirl(
                &collective_pair_twirl(&m, r, s).unwrap(),
                v.independent(),
            )
            .unwrap();
            assert!(again.frobenius_distance(&m).unwrap() < 1e-12);
        }
    }

    #[test]
    fn build_m2_is_permuted_m1() {
        let m1 = build_m(MVariant::M1);
        let m2 = build_m(MVariant::M2);
        let perm = m1
            .permute_registers(&[(R3, R5), (R5, R3), (R4b, R6b), (R6b, R4b)])
            .unwrap();
        assert!(perm.frobenius_distance(&m2).unwrap() < 1e-12);
    }

    #[test]
    fn monte_carlo_m_identity_stream_and_hermiticity() {
        let mc = monte_carlo_m(MVariant::M2, 37, 1234);
        assert!(mc.is_hermitian());
        assert_abs_diff_eq!(mc.trace().re, 8.0, epsilon = 1e-10);
    }

    #[test]
    fn monte_carlo_m_converges_to_build_m() {
        let v = MVariant::M1;
        let mc = monte_carlo_m(v, 20_000, 7);
        let exact = build_m(v);
        // O(1/sqrt(N)) with constant ~ a few; generous bound at 2e4 trials
        assert!(mc.frobenius_distance(&exact).unwrap() <= 0.1);
    }

    #[test]
    fn singlet_overlap_formula() {
        // <psi-| I (x) B |psi-> = tr(B)/2
        let b = Matrix2::new(
            C64::new(0.3, 0.1),
            C64::new(-0.4, 0.0),
            C64::new(0.2, -0.7),
            C64::new(1.1, 0.2),
        );
        let got = singlet_overlap(&Matrix2::identity(), &b);
        let want = (b[(0, 0)] + b[(1, 1)]) * C64::new(0.5, 0.0);
        assert!((got - want).norm() < 1e-15);

        // direct contraction against the 4-dim singlet vector
        let sv = crate::tensor::singlet_vector();
        let full = Matrix2::identity().kronecker(&b);
        let direct = (sv.adjoint() * &full * &sv)[(0, 0)];
        assert!((got - direct).norm() < 1e-15);
        let _ = singlet_projector(R1, R3).unwrap();
    }
}
