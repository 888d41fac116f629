//! Register-labeled multi-qubit operator algebra.
//!
//! Operators are dense complex matrices over an ordered list of named qubit
//! registers.  The canonical global register order is `(1, 2b, 3, 4b, 5, 6b)`,
//! where the `b` suffix marks the copy ("barred") register paired with the
//! unbarred one by a maximally entangled state.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Hermiticity tolerance: constructions are exact algebraic numbers, so any
/// asymmetry beyond double-precision noise is a bug.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default tolerance for positive-semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-9;

/// One of the six qubit registers of the three-slot tester.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegisterLabel {
    R1,
    R2b,
    R3,
    R4b,
    R5,
    R6b,
}

impl RegisterLabel {
    pub const ALL: [RegisterLabel; 6] = [
        RegisterLabel::R1,
        RegisterLabel::R2b,
        RegisterLabel::R3,
        RegisterLabel::R4b,
        RegisterLabel::R5,
        RegisterLabel::R6b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegisterLabel::R1 => "1",
            RegisterLabel::R2b => "2b",
            RegisterLabel::R3 => "3",
            RegisterLabel::R4b => "4b",
            RegisterLabel::R5 => "5",
            RegisterLabel::R6b => "6b",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(RegisterLabel::R1),
            "2b" => Ok(RegisterLabel::R2b),
            "3" => Ok(RegisterLabel::R3),
            "4b" => Ok(RegisterLabel::R4b),
            "5" => Ok(RegisterLabel::R5),
            "6b" => Ok(RegisterLabel::R6b),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }

    /// Position in the canonical global order `(1, 2b, 3, 4b, 5, 6b)`.
    pub fn canonical_index(self) -> usize {
        match self {
            RegisterLabel::R1 => 0,
            RegisterLabel::R2b => 1,
            RegisterLabel::R3 => 2,
            RegisterLabel::R4b => 3,
            RegisterLabel::R5 => 4,
            RegisterLabel::R6b => 5,
        }
    }
}

impl std::fmt::Display for RegisterLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered list of distinct register labels; total dimension is `2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemLayout {
    regs: Vec<RegisterLabel>,
}

impl SystemLayout {
    pub fn new(regs: Vec<RegisterLabel>) -> Result<Self> {
        for (i, r) in regs.iter().enumerate() {
            if regs[..i].contains(r) {
                return Err(Error::DuplicateLabel(r.as_str().to_string()));
            }
        }
        Ok(SystemLayout { regs })
    }

    /// The canonical six-register layout `(1, 2b, 3, 4b, 5, 6b)`.
    pub fn canonical_full() -> Self {
        SystemLayout { regs: RegisterLabel::ALL.to_vec() }
    }

    /// Same label set, reordered to the canonical global order.
    pub fn canonicalized(&self) -> Self {
        let mut regs = self.regs.clone();
        regs.sort_by_key(|r| r.canonical_index());
        SystemLayout { regs }
    }

    pub fn registers(&self) -> &[RegisterLabel] {
        &self.regs
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn side(&self) -> usize {
        1 << self.regs.len()
    }

    pub fn position(&self, r: RegisterLabel) -> Result<usize> {
        self.regs
            .iter()
            .position(|&x| x == r)
            .ok_or_else(|| Error::UnknownLabel(r.as_str().to_string()))
    }

    pub fn contains(&self, r: RegisterLabel) -> bool {
        self.regs.contains(&r)
    }

    fn describe(&self) -> String {
        self.regs.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(",")
    }
}

impl std::fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.describe())
    }
}

/// A dense complex square matrix over a register layout, row-major in the
/// tensor order of the layout (first register is the most significant bit).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    layout: SystemLayout,
    mat: CMatrix,
}

impl LabeledOperator {
    pub fn new(layout: SystemLayout, mat: CMatrix) -> Result<Self> {
        let side = layout.side();
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::Format(format!(
                "matrix is {}x{} but layout {} has side {}",
                mat.nrows(),
                mat.ncols(),
                layout,
                side
            )));
        }
        Ok(LabeledOperator { layout, mat })
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let side = layout.side();
        LabeledOperator { mat: CMatrix::identity(side, side), layout }
    }

    pub fn zeros(layout: SystemLayout) -> Self {
        let side = layout.side();
        LabeledOperator { mat: CMatrix::zeros(side, side), layout }
    }

    /// Rank-1 projector `|v><v|` over the given layout.
    pub fn projector(layout: SystemLayout, v: &nalgebra::DVector<C64>) -> Result<Self> {
        if v.len() != layout.side() {
            return Err(Error::Format(format!(
                "vector length {} does not match layout side {}",
                v.len(),
                layout.side()
            )));
        }
        let mat = v * v.adjoint();
        Ok(LabeledOperator { layout, mat })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn side(&self) -> usize {
        self.layout.side()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        LabeledOperator { layout: self.layout.clone(), mat: &self.mat * C64::new(s, 0.0) }
    }

    pub fn add(&self, other: &LabeledOperator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(LabeledOperator { layout: self.layout.clone(), mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &LabeledOperator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(LabeledOperator { layout: self.layout.clone(), mat: &self.mat - &other.mat })
    }

    fn check_same_layout(&self, other: &LabeledOperator) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch {
                expected: self.layout.to_string(),
                got: other.layout.to_string(),
            });
        }
        Ok(())
    }

    /// Max-abs deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.mat.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITICITY_TOL
    }

    /// Tensor product; the result layout is `self`'s labels followed by
    /// `other`'s.  Label sets must be disjoint.
    pub fn kron(&self, other: &LabeledOperator) -> Result<Self> {
        let mut regs = self.layout.regs.clone();
        for r in &other.layout.regs {
            if regs.contains(r) {
                return Err(Error::DuplicateLabel(r.as_str().to_string()));
            }
            regs.push(*r);
        }
        Ok(LabeledOperator {
            layout: SystemLayout { regs },
            mat: self.mat.kronecker(&other.mat),
        })
    }

    /// Traces out the named registers; the remaining registers keep their
    /// relative order.
    pub fn partial_trace(&self, out: &[RegisterLabel]) -> Result<Self> {
        for r in out {
            self.layout.position(*r)?;
        }
        let n = self.layout.len();
        let kept: Vec<usize> =
            (0..n).filter(|i| !out.contains(&self.layout.regs[*i])).collect();
        let traced: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
        let kn = kept.len();
        let tn = traced.len();
        let kside = 1 << kn;
        let tside = 1 << tn;

        // index with bit b at layout position p contributes b << (n-1-p)
        let compose = |keep_idx: usize, tr_idx: usize| -> usize {
            let mut full = 0usize;
            for (bit, &p) in kept.iter().enumerate() {
                let b = (keep_idx >> (kn - 1 - bit)) & 1;
                full |= b << (n - 1 - p);
            }
            for (bit, &p) in traced.iter().enumerate() {
                let b = (tr_idx >> (tn - 1 - bit)) & 1;
                full |= b << (n - 1 - p);
            }
            full
        };

        let mut mat = CMatrix::zeros(kside, kside);
        for r in 0..kside {
            for c in 0..kside {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..tside {
                    acc += self.mat[(compose(r, k), compose(c, k))];
                }
                mat[(r, c)] = acc;
            }
        }
        let regs = kept.iter().map(|&i| self.layout.regs[i]).collect();
        Ok(LabeledOperator { layout: SystemLayout { regs }, mat })
    }

    /// Permutes tensor factors so the layout becomes `target` (same label set,
    /// different order).
    pub fn reorder(&self, target: &SystemLayout) -> Result<Self> {
        if target.len() != self.layout.len() {
            return Err(Error::LayoutMismatch {
                expected: self.layout.to_string(),
                got: target.to_string(),
            });
        }
        let n = self.layout.len();
        // old position of the register at each target position
        let mut old_pos = Vec::with_capacity(n);
        for &r in &target.regs {
            old_pos.push(self.layout.position(r)?);
        }
        let side = self.layout.side();
        // map target-basis index to source-basis index
        let map = |idx: usize| -> usize {
            let mut src = 0usize;
            for (j, &p) in old_pos.iter().enumerate() {
                let b = (idx >> (n - 1 - j)) & 1;
                src |= b << (n - 1 - p);
            }
            src
        };
        let idx_map: Vec<usize> = (0..side).map(map).collect();
        let mut mat = CMatrix::zeros(side, side);
        for r in 0..side {
            for c in 0..side {
                mat[(r, c)] = self.mat[(idx_map[r], idx_map[c])];
            }
        }
        Ok(LabeledOperator { layout: target.clone(), mat })
    }

    /// Reorders factors to the canonical global register order.
    pub fn canonicalize(&self) -> Self {
        self.reorder(&self.layout.canonicalized()).expect("same label set")
    }

    /// Applies a relabeling bijection on the label set; entries are permuted
    /// by the induced tensor-factor permutation and presented on the original
    /// layout order.
    pub fn permute_registers(
        &self,
        relabeling: &[(RegisterLabel, RegisterLabel)],
    ) -> Result<Self> {
        let map = |r: RegisterLabel| -> RegisterLabel {
            relabeling.iter().find(|(from, _)| *from == r).map(|(_, to)| *to).unwrap_or(r)
        };
        let new_regs: Vec<RegisterLabel> = self.layout.regs.iter().map(|&r| map(r)).collect();
        // bijective on the label set: image must equal the original set
        let mut sorted_new = new_regs.clone();
        sorted_new.sort();
        let mut sorted_old = self.layout.regs.clone();
        sorted_old.sort();
        if sorted_new != sorted_old || {
            let mut dedup = new_regs.clone();
            dedup.sort();
            dedup.dedup();
            dedup.len() != new_regs.len()
        } {
            return Err(Error::NonBijectiveRelabeling);
        }
        let relabeled =
            LabeledOperator { layout: SystemLayout { regs: new_regs }, mat: self.mat.clone() };
        relabeled.reorder(&self.layout)
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let defect = self.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(crate::linalg::eigvalsh(&self.mat))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eigenvalues()?[0])
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    pub fn frobenius_distance(&self, other: &LabeledOperator) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok((&self.mat - &other.mat).norm())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Entrywise transpose in the computational basis.
    pub fn transpose_computational(&self) -> Self {
        LabeledOperator { layout: self.layout.clone(), mat: self.mat.transpose() }
    }
}

/// The unnormalized maximally entangled state `sum_ij |ii><jj|` across two
/// registers; trace 2, rank 1.
pub fn max_entangled(a: RegisterLabel, b: RegisterLabel) -> Result<LabeledOperator> {
    let layout = SystemLayout::new(vec![a, b])?;
    let mut v = nalgebra::DVector::zeros(4);
    v[0] = C64::new(1.0, 0.0);
    v[3] = C64::new(1.0, 0.0);
    LabeledOperator::projector(layout, &v)
}

/// The singlet vector `(|01> - |10>)/sqrt(2)` as a length-4 complex vector.
pub fn singlet_vector() -> nalgebra::DVector<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = nalgebra::DVector::zeros(4);
    v[1] = C64::new(s, 0.0);
    v[2] = C64::new(-s, 0.0);
    v
}

/// Projector onto the two-qubit singlet; trace 1, rank 1.
pub fn singlet_projector(a: RegisterLabel, b: RegisterLabel) -> Result<LabeledOperator> {
    let layout = SystemLayout::new(vec![a, b])?;
    LabeledOperator::projector(layout, &singlet_vector())
}
