//! SU(2) irrep bases for two and three qubits, the closed-form dual
//! certificates at value 7/8, and the dual-feasibility verifier.
//!
//! Three qubits decompose as two spin-1/2 copies plus one spin-3/2 (v-basis);
//! two qubits as singlet plus triplet (w-basis).  The certificate operators
//! Omega (six registers) and Omega' (four registers) are block-diagonal in
//! these bases, so they are stored as small coefficient blocks and assembled
//! on demand.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::haar::MVariant;
use crate::linalg::eigvalsh;
use crate::tensor::{C64, CMatrix, LabeledOperator, RegisterLabel, SystemLayout};

/// An exact coefficient: either `p/q` or `p/(q*sqrt3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exact {
    Rat(i64, i64),
    RatSqrt3(i64, i64),
}

impl Exact {
    pub const ZERO: Exact = Exact::Rat(0, 1);

    pub fn value(self) -> f64 {
        match self {
            Exact::Rat(p, q) => p as f64 / q as f64,
            Exact::RatSqrt3(p, q) => p as f64 / (q as f64 * 3f64.sqrt()),
        }
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Exact::Rat(p, 1) => write!(f, "{p}"),
            Exact::Rat(p, q) => write!(f, "{p}/{q}"),
            Exact::RatSqrt3(p, q) if p < 0 => write!(f, "-{}/({}*sqrt3)", -p, q),
            Exact::RatSqrt3(p, q) => write!(f, "{p}/({q}*sqrt3)"),
        }
    }
}

impl FromStr for Exact {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("malformed exact value: {s:?}"));
        let s = s.trim();
        let (neg, s) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let sign = if neg { -1 } else { 1 };
        match s.split_once('/') {
            None => Ok(Exact::Rat(sign * s.parse::<i64>().map_err(|_| bad())?, 1)),
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q = q.trim();
                if let Some(inner) = q.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
                    let qn = inner
                        .strip_suffix("*sqrt3")
                        .ok_or_else(bad)?
                        .trim()
                        .parse::<i64>()
                        .map_err(|_| bad())?;
                    Ok(Exact::RatSqrt3(sign * p, qn))
                } else {
                    Ok(Exact::Rat(sign * p, q.parse::<i64>().map_err(|_| bad())?))
                }
            }
        }
    }
}

/// An ordered pair of call orderings being discriminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidatePair {
    P12,
    P23,
    P31,
}

impl CandidatePair {
    pub const ALL: [CandidatePair; 3] = [CandidatePair::P12, CandidatePair::P23, CandidatePair::P31];

    pub fn indices(self) -> (u8, u8) {
        match self {
            CandidatePair::P12 => (1, 2),
            CandidatePair::P23 => (2, 3),
            CandidatePair::P31 => (3, 1),
        }
    }

    pub fn variants(self) -> (MVariant, MVariant) {
        let (j, jp) = self.indices();
        (MVariant::from_index(j).unwrap(), MVariant::from_index(jp).unwrap())
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "12" => Ok(CandidatePair::P12),
            "23" => Ok(CandidatePair::P23),
            "31" => Ok(CandidatePair::P31),
            _ => Err(Error::InvalidPair(s.to_string())),
        }
    }
}

impl fmt::Display for CandidatePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (j, jp) = self.indices();
        write!(f, "{j}{jp}")
    }
}

/// Orthonormal three-qubit basis adapted to collective SU(2) rotations:
/// `doublet[k][l]` are the two spin-1/2 copies (multiplicity k, weight l),
/// `quartet[k]` the spin-3/2 vectors.  Tensor order follows the given trio.
#[derive(Debug, Clone)]
pub struct ThreeQubitIrrepBasis {
    pub trio: SystemLayout,
    pub doublet: [[DVector<C64>; 2]; 2],
    pub quartet: [DVector<C64>; 4],
}

fn ket8(bits: usize) -> DVector<C64> {
    let mut v = DVector::zeros(8);
    v[bits] = C64::new(1.0, 0.0);
    v
}

fn ket4(bits: usize) -> DVector<C64> {
    let mut v = DVector::zeros(4);
    v[bits] = C64::new(1.0, 0.0);
    v
}

pub fn three_qubit_basis(trio: &[RegisterLabel]) -> Result<ThreeQubitIrrepBasis> {
    if trio.len() != 3 {
        return Err(Error::WrongRegisterCount { expected: 3, got: trio.len() });
    }
    let layout = SystemLayout::new(trio.to_vec())?;
    let s2 = 0.5f64.sqrt();
    let s23 = (2.0f64 / 3.0).sqrt();
    let s16 = (1.0f64 / 6.0).sqrt();
    let s13 = (1.0f64 / 3.0).sqrt();
    let r = |x: f64| C64::new(x, 0.0);

    // doublet[k][l]: k is the label summed diagonally in block assemblies,
    // l the coefficient index coupling the two doublet copies
    let doublet = [
        [
            (ket8(0b010) - ket8(0b100)) * r(s2),
            ket8(0b001) * r(s23) - (ket8(0b010) + ket8(0b100)) * r(s16),
        ],
        [
            (ket8(0b011) - ket8(0b101)) * r(s2),
            ket8(0b110) * r(-s23) + (ket8(0b011) + ket8(0b101)) * r(s16),
        ],
    ];
    let quartet = [
        ket8(0b000),
        (ket8(0b010) + ket8(0b001) + ket8(0b100)) * r(s13),
        (ket8(0b011) + ket8(0b110) + ket8(0b101)) * r(s13),
        ket8(0b111),
    ];
    Ok(ThreeQubitIrrepBasis { trio: layout, doublet, quartet })
}

/// Singlet/triplet basis of a register pair.
#[derive(Debug, Clone)]
pub struct TwoQubitIrrepBasis {
    pub pair: SystemLayout,
    pub singlet: DVector<C64>,
    pub triplet: [DVector<C64>; 3],
}

pub fn two_qubit_basis(pair: &[RegisterLabel]) -> Result<TwoQubitIrrepBasis> {
    if pair.len() != 2 {
        return Err(Error::WrongRegisterCount { expected: 2, got: pair.len() });
    }
    let layout = SystemLayout::new(pair.to_vec())?;
    let s2 = C64::new(0.5f64.sqrt(), 0.0);
    Ok(TwoQubitIrrepBasis {
        pair: layout,
        singlet: (ket4(0b01) - ket4(0b10)) * s2,
        triplet: [ket4(0b00), (ket4(0b01) + ket4(0b10)) * s2, ket4(0b11)],
    })
}

/// A closed-form dual-feasible point at value lambda.
///
/// Coefficient blocks live in the v-basis over trios (1,3,5) and (2b,4b,6b):
/// `omega_half_half[2*l1+l2][2*l1p+l2p]` couples doublet weights of the two
/// trios (rows index the ket weights, columns the bra weights), `omega_32_12`
/// couples the first trio's quartet with the second trio's doublet weights,
/// `omega_12_32` the reverse, and `omega_32_32` sits on quartet (x) quartet.
/// `omega_prime` holds the four singlet/triplet sector weights of Omega' over
/// w-bases on pairs (1,3) and (2b,4b), in order (00, 01, 10, 11).
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub pair: CandidatePair,
    pub lambda: Exact,
    pub omega_half_half: [[Exact; 4]; 4],
    pub omega_32_12: [[Exact; 2]; 2],
    pub omega_12_32: [[Exact; 2]; 2],
    pub omega_32_32: Exact,
    pub omega_prime: [Exact; 4],
}

impl fmt::Display for DualCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pair: {}", self.pair)?;
        writeln!(f, "lambda: {}", self.lambda)?;
        for (name, block) in [("omega_32_12", &self.omega_32_12), ("omega_12_32", &self.omega_12_32)]
        {
            let rows: Vec<String> = block
                .iter()
                .map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))
                .collect();
            writeln!(f, "{name}: [{}]", rows.join("; "))?;
        }
        let rows: Vec<String> = self
            .omega_half_half
            .iter()
            .map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))
            .collect();
        writeln!(f, "omega_half_half: [{}]", rows.join("; "))?;
        writeln!(f, "omega_32_32: {}", self.omega_32_32)?;
        let prime: Vec<String> = self.omega_prime.iter().map(|e| e.to_string()).collect();
        writeln!(f, "omega_prime: [{}]", prime.join(", "))
    }
}

fn ex(s: &str) -> Exact {
    s.parse().expect("static exact literal")
}

/// The known dual-feasible parameter sets at lambda = 7/8 for the two base
/// pairs.  (The third pair is handled by [`transfer_certificate_swap`].)
pub fn closed_form_certificate(pair: CandidatePair) -> Result<DualCertificate> {
    match pair {
        CandidatePair::P12 => Ok(DualCertificate {
            pair,
            lambda: ex("7/8"),
            omega_half_half: [
                [ex("1/4"), Exact::ZERO, Exact::ZERO, Exact::ZERO],
                [Exact::ZERO, ex("1/16"), ex("1/16"), ex("1/(8*sqrt3)")],
                [Exact::ZERO, ex("1/16"), ex("1/16"), ex("1/(8*sqrt3)")],
                [Exact::ZERO, ex("1/(8*sqrt3)"), ex("1/(8*sqrt3)"), ex("1/6")],
            ],
            // the two mixed blocks are assigned to the (3/2,1/2) and
            // (1/2,3/2) slots in the order forced by the marginal condition
            // on Omega; the opposite assignment violates it by 1/4
            omega_32_12: [
                [ex("1/16"), ex("-1/(16*sqrt3)")],
                [ex("-1/(16*sqrt3)"), ex("1/6")],
            ],
            omega_12_32: [
                [ex("1/16"), ex("-1/(16*sqrt3)")],
                [ex("-1/(16*sqrt3)"), ex("5/48")],
            ],
            omega_32_32: ex("5/48"),
            omega_prime: [ex("1/2"), ex("1/8"), ex("1/8"), ex("1/4")],
        }),
        CandidatePair::P23 => Ok(DualCertificate {
            pair,
            lambda: ex("7/8"),
            omega_half_half: [
                [ex("1/16"), Exact::ZERO, Exact::ZERO, ex("1/16")],
                [Exact::ZERO, ex("1/8"), ex("1/8"), Exact::ZERO],
                [Exact::ZERO, ex("1/8"), ex("1/8"), Exact::ZERO],
                [ex("1/16"), Exact::ZERO, Exact::ZERO, ex("11/48")],
            ],
            omega_32_12: [[ex("1/8"), Exact::ZERO], [Exact::ZERO, ex("1/24")]],
            omega_12_32: [[ex("1/8"), Exact::ZERO], [Exact::ZERO, ex("1/24")]],
            omega_32_32: ex("13/96"),
            omega_prime: [ex("1/8"), ex("1/4"), ex("1/4"), ex("5/24")],
        }),
        CandidatePair::P31 => Err(Error::InvalidPair(
            "pair 31 has no direct parameter set; use transfer_certificate_swap".into(),
        )),
    }
}

fn outer(a: &DVector<C64>, b: &DVector<C64>) -> CMatrix {
    a * b.adjoint()
}

/// Six-register assembly layout: first trio (1,3,5), second trio (2b,4b,6b).
fn trio_layout() -> SystemLayout {
    use RegisterLabel::*;
    SystemLayout::new(vec![R1, R3, R5, R2b, R4b, R6b]).unwrap()
}

fn assemble_trio_blocks(
    hh: &[[Exact; 4]; 4],
    qd: &[[Exact; 2]; 2],
    dq: &[[Exact; 2]; 2],
    qq: Exact,
) -> LabeledOperator {
    use RegisterLabel::*;
    let first = three_qubit_basis(&[R1, R3, R5]).unwrap();
    let second = three_qubit_basis(&[R2b, R4b, R6b]).unwrap();
    let mut a = CMatrix::zeros(64, 64);

    // doublet (x) doublet, diagonal in the multiplicity labels k1, k2
    for k1 in 0..2 {
        for k2 in 0..2 {
            for l1 in 0..2 {
                for l1p in 0..2 {
                    let p1 = outer(&first.doublet[k1][l1], &first.doublet[k1][l1p]);
                    for l2 in 0..2 {
                        for l2p in 0..2 {
                            let c = hh[2 * l1 + l2][2 * l1p + l2p].value();
                            if c != 0.0 {
                                let p2 =
                                    outer(&second.doublet[k2][l2], &second.doublet[k2][l2p]);
                                a += p1.kronecker(&p2) * C64::new(c, 0.0);
                            }
                        }
                    }
                }
            }
        }
    }
    // quartet (x) doublet
    for q in &first.quartet {
        let p1 = outer(q, q);
        for k2 in 0..2 {
            for (l, row) in qd.iter().enumerate() {
                for (lp, c) in row.iter().enumerate() {
                    if c.value() != 0.0 {
                        let p2 = outer(&second.doublet[k2][l], &second.doublet[k2][lp]);
                        a += p1.kronecker(&p2) * C64::new(c.value(), 0.0);
                    }
                }
            }
        }
    }
    // doublet (x) quartet
    for k1 in 0..2 {
        for q in &second.quartet {
            let p2 = outer(q, q);
            for (l, row) in dq.iter().enumerate() {
                for (lp, c) in row.iter().enumerate() {
                    if c.value() != 0.0 {
                        let p1 = outer(&first.doublet[k1][l], &first.doublet[k1][lp]);
                        a += p1.kronecker(&p2) * C64::new(c.value(), 0.0);
                    }
                }
            }
        }
    }
    // quartet (x) quartet
    let c = C64::new(qq.value(), 0.0);
    if c.re != 0.0 {
        let mut pq1 = CMatrix::zeros(8, 8);
        for q in &first.quartet {
            pq1 += outer(q, q);
        }
        let mut pq2 = CMatrix::zeros(8, 8);
        for q in &second.quartet {
            pq2 += outer(q, q);
        }
        a += pq1.kronecker(&pq2) * c;
    }

    LabeledOperator::new(trio_layout(), a).unwrap().canonicalize()
}

/// Omega on the canonical six-register layout.
pub fn assemble_omega(cert: &DualCertificate) -> LabeledOperator {
    assemble_trio_blocks(
        &cert.omega_half_half,
        &cert.omega_32_12,
        &cert.omega_12_32,
        cert.omega_32_32,
    )
}

/// Omega' on the canonical layout (1, 2b, 3, 4b), sector weights over
/// w-bases on pairs (1,3) and (2b,4b).
pub fn assemble_omega_prime(cert: &DualCertificate) -> LabeledOperator {
    use RegisterLabel::*;
    let first = two_qubit_basis(&[R1, R3]).unwrap();
    let second = two_qubit_basis(&[R2b, R4b]).unwrap();
    let s1 = outer(&first.singlet, &first.singlet);
    let s2 = outer(&second.singlet, &second.singlet);
    let mut t1 = CMatrix::zeros(4, 4);
    for t in &first.triplet {
        t1 += outer(t, t);
    }
    let mut t2 = CMatrix::zeros(4, 4);
    for t in &second.triplet {
        t2 += outer(t, t);
    }
    let [w00, w01, w10, w11] = cert.omega_prime.map(|e| C64::new(e.value(), 0.0));
    let a = s1.kronecker(&s2) * w00
        + s1.kronecker(&t2) * w01
        + t1.kronecker(&s2) * w10
        + t1.kronecker(&t2) * w11;
    let layout = SystemLayout::new(vec![R1, R3, R2b, R4b]).unwrap();
    LabeledOperator::new(layout, a).unwrap().canonicalize()
}

/// The known coefficient table for the first averaged Choi operator,
/// assembled in the v-basis; independent cross-check of `build_m(M1)`.
pub fn assemble_m1_from_table() -> LabeledOperator {
    let mut hh = [[Exact::ZERO; 4]; 4];
    hh[0][0] = ex("1/2");
    hh[3][3] = ex("1/6");
    let mixed = [[Exact::ZERO, Exact::ZERO], [Exact::ZERO, ex("1/6")]];
    assemble_trio_blocks(&hh, &mixed, &mixed, ex("1/6"))
}

/// Residuals and verdicts for the five dual-feasibility conditions.
#[derive(Debug, Clone)]
pub struct DualReport {
    pub pair: CandidatePair,
    pub lambda: f64,
    /// min eigenvalues of Omega and Omega' (d1; lambda >= 0 also checked)
    pub omega_min_eig: f64,
    pub omega_prime_min_eig: f64,
    /// min eigenvalue of Omega - M<j>/2 (d2) and Omega - M<j'>/2 (d3)
    pub d2_min_eig: f64,
    pub d3_min_eig: f64,
    /// Frobenius residual of tr_{6b}(Omega) = Omega' (x) I_5 (d4)
    pub d4_residual: f64,
    /// Frobenius residual of tr_{2b,4b}(Omega') = lambda I_{1,3} (d5)
    pub d5_residual: f64,
    pub tol_psd: f64,
    pub tol_eq: f64,
    pub pass: bool,
}

impl DualReport {
    pub fn checks(&self) -> [(&'static str, f64, bool); 5] {
        [
            (
                "d1",
                self.omega_min_eig.min(self.omega_prime_min_eig).min(self.lambda),
                self.omega_min_eig >= -self.tol_psd
                    && self.omega_prime_min_eig >= -self.tol_psd
                    && self.lambda >= 0.0,
            ),
            ("d2", self.d2_min_eig, self.d2_min_eig >= -self.tol_psd),
            ("d3", self.d3_min_eig, self.d3_min_eig >= -self.tol_psd),
            ("d4", self.d4_residual, self.d4_residual <= self.tol_eq),
            ("d5", self.d5_residual, self.d5_residual <= self.tol_eq),
        ]
    }
}

impl fmt::Display for DualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pair: {}", self.pair)?;
        writeln!(f, "lambda: {}", self.lambda)?;
        writeln!(f, "tol_psd: {:e}", self.tol_psd)?;
        writeln!(f, "tol_eq: {:e}", self.tol_eq)?;
        for (name, value, ok) in self.checks() {
            writeln!(f, "{name}: {:.3e} {}", value, if ok { "pass" } else { "FAIL" })?;
        }
        writeln!(f, "overall: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

/// Checks the five dual conditions of the assembled pair (Omega, Omega')
/// against the two averaged Choi operators.
pub fn verify_dual_operators(
    pair: CandidatePair,
    omega: &LabeledOperator,
    omega_prime: &LabeledOperator,
    lambda: f64,
    m_j: &LabeledOperator,
    m_jp: &LabeledOperator,
    tol_psd: f64,
    tol_eq: f64,
) -> Result<DualReport> {
    let omega = omega.canonicalize();
    let omega_prime = omega_prime.canonicalize();
    let m_j = m_j.canonicalize();
    let m_jp = m_jp.canonicalize();

    let omega_min_eig = omega.min_eigenvalue()?;
    let omega_prime_min_eig = omega_prime.min_eigenvalue()?;
    let d2_min_eig = eigvalsh(&(omega.matrix() - m_j.matrix() * C64::new(0.5, 0.0)))[0];
    let d3_min_eig = eigvalsh(&(omega.matrix() - m_jp.matrix() * C64::new(0.5, 0.0)))[0];

    let tr6b = omega.partial_trace(&[RegisterLabel::R6b])?;
    let id5 = LabeledOperator::identity(SystemLayout::new(vec![RegisterLabel::R5])?);
    let rhs = omega_prime.kron(&id5)?.reorder(tr6b.layout())?;
    let d4_residual = tr6b.frobenius_distance(&rhs)?;

    let marg = omega_prime.partial_trace(&[RegisterLabel::R2b, RegisterLabel::R4b])?;
    let lam_id = LabeledOperator::identity(marg.layout().clone()).scale(lambda);
    let d5_residual = marg.frobenius_distance(&lam_id)?;

    let mut report = DualReport {
        pair,
        lambda,
        omega_min_eig,
        omega_prime_min_eig,
        d2_min_eig,
        d3_min_eig,
        d4_residual,
        d5_residual,
        tol_psd,
        tol_eq,
        pass: false,
    };
    report.pass = report.checks().iter().all(|&(_, _, ok)| ok);
    Ok(report)
}

/// Verifies a certificate for its own pair.
pub fn verify_dual(
    cert: &DualCertificate,
    m_j: &LabeledOperator,
    m_jp: &LabeledOperator,
    tol_psd: f64,
    tol_eq: f64,
) -> Result<DualReport> {
    verify_dual_operators(
        cert.pair,
        &assemble_omega(cert),
        &assemble_omega_prime(cert),
        cert.lambda.value(),
        m_j,
        m_jp,
        tol_psd,
        tol_eq,
    )
}

/// Permutation 1 <-> 3, 2b <-> 4b as a relabeling list.
pub fn swap_13() -> [(RegisterLabel, RegisterLabel); 4] {
    use RegisterLabel::*;
    [(R1, R3), (R3, R1), (R2b, R4b), (R4b, R2b)]
}

/// Transfers the pair-{1,2} certificate to pair {3,1} by the register swap
/// 1 <-> 3, 2b <-> 4b and verifies it against (M<3>, M<1>).
pub fn transfer_certificate_swap(
    cert: &DualCertificate,
    m3: &LabeledOperator,
    m1: &LabeledOperator,
    tol_psd: f64,
    tol_eq: f64,
) -> Result<DualReport> {
    if cert.pair != CandidatePair::P12 {
        return Err(Error::InvalidPair(format!(
            "swap transfer starts from pair 12, got {}",
            cert.pair
        )));
    }
    let omega = assemble_omega(cert).permute_registers(&swap_13())?;
    let omega_prime = assemble_omega_prime(cert).permute_registers(&swap_13())?;
    verify_dual_operators(
        CandidatePair::P31,
        &omega,
        &omega_prime,
        cert.lambda.value(),
        m3,
        m1,
        tol_psd,
        tol_eq,
    )
}
