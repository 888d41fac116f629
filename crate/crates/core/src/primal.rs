//! The primal semidefinite program over tester blocks (rho1, rho2), the
//! exact comparison-protocol feasible point at 7/8, and a projection-based
//! first-order solver.
//!
//! Variables are the two guess blocks only; the intermediate reduced states
//! are eliminated.  Writing sigma = rho1 + rho2, feasibility reads
//!   (E1) sigma = (1/2) tr_{6b}(sigma) (x) I_{6b}
//!   (E2) tr_5 of the reduced state factorizes through registers (1,3)
//!   (E3) the innermost reduced state has unit trace
//! and both blocks are PSD.  The objective is
//! (tr(M<j> rho1) + tr(M<j'> rho2)) / 2, maximized.

use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::haar::build_m;
use crate::irrep::CandidatePair;
use crate::linalg::project_psd;
use crate::tensor::{LabeledOperator, RegisterLabel, SystemLayout, singlet_projector};

/// The two guess blocks of a tester, canonical 64x64 layout each.
#[derive(Debug, Clone)]
pub struct SdpPair {
    pub rho1: LabeledOperator,
    pub rho2: LabeledOperator,
}

/// Assembled problem data.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub pair: CandidatePair,
    /// objective operators: C_g = M/2 for the matching guess
    pub c1: LabeledOperator,
    pub c2: LabeledOperator,
    /// right-hand side of (E3); 1 for the physical problem
    pub rhs: f64,
}

pub fn assemble_primal(pair: CandidatePair) -> SdpProblem {
    let (vj, vjp) = pair.variants();
    SdpProblem {
        pair,
        c1: build_m(vj).scale(0.5),
        c2: build_m(vjp).scale(0.5),
        rhs: 1.0,
    }
}

fn canonical6() -> SystemLayout {
    SystemLayout::canonical_full()
}

/// The maximally mixed feasible point rho1 = rho2 = I/16, objective 1/2.
pub fn maximally_mixed_point(rhs: f64) -> SdpPair {
    let id = LabeledOperator::identity(canonical6()).scale(rhs / 16.0);
    SdpPair { rho1: id.clone(), rho2: id }
}

/// The comparison-protocol tester: a singlet shared between one sample slot
/// and the target slot, the other sample fed half the singlet pair is not --
/// it is probed by nothing (maximally mixed input), and a singlet-vs-rest
/// measurement on the corresponding output pair decides the guess.
pub fn comparison_tester_choi(pair: CandidatePair) -> Result<SdpPair> {
    use RegisterLabel::*;
    // (psi-)_{a,b} (x) (I/2)_m (x) Pi^{(g)}_{c,d} (x) I_e
    let place = |a, b, m: RegisterLabel, c, d, e: RegisterLabel, same: bool| -> Result<LabeledOperator> {
        let psi = singlet_projector(a, b)?;
        let mid = LabeledOperator::identity(SystemLayout::new(vec![m])?).scale(0.5);
        let pi_singlet = singlet_projector(c, d)?;
        let pi = if same {
            pi_singlet
        } else {
            LabeledOperator::identity(pi_singlet.layout().clone()).sub(&pi_singlet)?
        };
        let rest = LabeledOperator::identity(SystemLayout::new(vec![e])?);
        Ok(psi.kron(&mid)?.kron(&pi)?.kron(&rest)?.canonicalize())
    };
    match pair {
        CandidatePair::P12 => Ok(SdpPair {
            rho1: place(R1, R3, R5, R2b, R4b, R6b, true)?,
            rho2: place(R1, R3, R5, R2b, R4b, R6b, false)?,
        }),
        CandidatePair::P23 => Ok(SdpPair {
            rho1: place(R1, R5, R3, R2b, R6b, R4b, true)?,
            rho2: place(R1, R5, R3, R2b, R6b, R4b, false)?,
        }),
        CandidatePair::P31 => {
            // relabel the pair-12 point by 1 <-> 3, 2b <-> 4b; this maps the
            // averaged operators as (M<1>, M<2>) -> (M<1>, M<3>), so the
            // guess roles exchange: the old guess-2 block becomes the block
            // paired with M<3>, i.e. the new guess-1
            let base = comparison_tester_choi(CandidatePair::P12)?;
            let swap = crate::irrep::swap_13();
            Ok(SdpPair {
                rho1: base.rho2.permute_registers(&swap)?,
                rho2: base.rho1.permute_registers(&swap)?,
            })
        }
    }
}

/// (tr(M<j> rho1) + tr(M<j'> rho2)) / 2; errors if the trace picks up an
/// imaginary part above 1e-10.
pub fn objective_esp(rho1: &LabeledOperator, rho2: &LabeledOperator, pair: CandidatePair) -> Result<f64> {
    let (vj, vjp) = pair.variants();
    objective_with(&build_m(vj).scale(0.5), &build_m(vjp).scale(0.5), rho1, rho2)
}

fn objective_with(
    c1: &LabeledOperator,
    c2: &LabeledOperator,
    rho1: &LabeledOperator,
    rho2: &LabeledOperator,
) -> Result<f64> {
    let rho1 = rho1.canonicalize();
    let rho2 = rho2.canonicalize();
    let t = (c1.matrix().adjoint() * rho1.matrix()).trace()
        + (c2.matrix().adjoint() * rho2.matrix()).trace();
    if t.im.abs() > 1e-10 {
        return Err(Error::Format(format!("objective has imaginary part {:e}", t.im)));
    }
    Ok(t.re)
}

/// Residuals of the three constraint families plus block min-eigenvalues.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub e1_residual: f64,
    pub e2_residual: f64,
    pub e3_residual: f64,
    pub min_eig_rho1: f64,
    pub min_eig_rho2: f64,
    pub tol: f64,
    pub pass: bool,
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "e1_residual: {:.3e}", self.e1_residual)?;
        writeln!(f, "e2_residual: {:.3e}", self.e2_residual)?;
        writeln!(f, "e3_residual: {:.3e}", self.e3_residual)?;
        writeln!(f, "min_eig_rho1: {:.3e}", self.min_eig_rho1)?;
        writeln!(f, "min_eig_rho2: {:.3e}", self.min_eig_rho2)?;
        writeln!(f, "feasible: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

/// The reduced 32-dim state: (1/2) tr_{6b}(sigma).
fn reduced1(sigma: &LabeledOperator) -> Result<LabeledOperator> {
    Ok(sigma.partial_trace(&[RegisterLabel::R6b])?.scale(0.5))
}

/// The innermost 4-dim state on (1,3): (1/4) tr_{2b,4b}(tr_5(reduced1)).
fn reduced2(red1: &LabeledOperator) -> Result<LabeledOperator> {
    Ok(red1
        .partial_trace(&[RegisterLabel::R5, RegisterLabel::R2b, RegisterLabel::R4b])?
        .scale(0.25))
}

pub fn check_primal_feasibility(
    rho1: &LabeledOperator,
    rho2: &LabeledOperator,
    rhs: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    use RegisterLabel::*;
    let rho1 = rho1.canonicalize();
    let rho2 = rho2.canonicalize();
    let sigma = rho1.add(&rho2)?;

    let red1 = reduced1(&sigma)?;
    let id6b = LabeledOperator::identity(SystemLayout::new(vec![R6b])?);
    let e1_residual = sigma.frobenius_distance(&red1.kron(&id6b)?.canonicalize())?;

    let tr5 = red1.partial_trace(&[R5])?; // on (1,2b,3,4b)
    let red2 = reduced2(&red1)?; // on (1,3)
    let id2b4b = LabeledOperator::identity(SystemLayout::new(vec![R2b, R4b])?);
    let rhs2 = red2.kron(&id2b4b)?.reorder(tr5.layout())?;
    let e2_residual = tr5.frobenius_distance(&rhs2)?;

    let e3_residual = (red2.trace().re - rhs).abs();

    let min_eig_rho1 = rho1.min_eigenvalue()?;
    let min_eig_rho2 = rho2.min_eigenvalue()?;
    let pass = e1_residual <= tol
        && e2_residual <= tol
        && e3_residual <= tol
        && min_eig_rho1 >= -tol
        && min_eig_rho2 >= -tol;
    Ok(FeasibilityReport {
        e1_residual,
        e2_residual,
        e3_residual,
        min_eig_rho1,
        min_eig_rho2,
        tol,
        pass,
    })
}

/// Orthogonal projection of sigma onto the affine constraint set.
///
/// With W the subspace cut out by (E1) and (E2) (with the reduced states
/// free), Pi_W = P1 - Bt B where P1 sigma = (1/2) tr_{6b}(sigma) (x) I and
/// B picks out the traceless-on-(2b,4b) part of (1/2) tr_{5,6b}(sigma);
/// both are orthogonal projections with range(Bt) inside range(P1), and
/// Pi_W preserves the trace.  The trace constraint tr sigma = 8 rhs is then
/// an affine shift along I, which lies in W.
fn project_affine_sigma(sigma: &LabeledOperator, rhs: f64) -> Result<LabeledOperator> {
    use RegisterLabel::*;
    let id6b = LabeledOperator::identity(SystemLayout::new(vec![R6b])?);
    let p1 = reduced1(sigma)?.kron(&id6b)?.canonicalize();

    // B sigma: w = (1/2) tr_{5,6b}(sigma) on (1,2b,3,4b); subtract the part
    // factorizing through (1,3)
    let w = sigma.partial_trace(&[R5, R6b])?.scale(0.5);
    let w13 = w.partial_trace(&[R2b, R4b])?.scale(0.25);
    let id2b4b = LabeledOperator::identity(SystemLayout::new(vec![R2b, R4b])?);
    let q2w = w.sub(&w13.kron(&id2b4b)?.reorder(w.layout())?)?;

    // Bt (B sigma) = (1/2) (B sigma) (x) I_{5,6b}
    let id56b = LabeledOperator::identity(SystemLayout::new(vec![R5, R6b])?);
    let btb = q2w.kron(&id56b)?.scale(0.5).canonicalize();

    let shift = (8.0 * rhs - sigma.trace().re) / 64.0;
    p1.sub(&btb)?
        .add(&LabeledOperator::identity(canonical6()).scale(shift))
}

/// Orthogonal projection of the block pair onto the affine set: the
/// minimum-norm correction splits equally between the blocks.
fn project_affine_pair(x: &SdpPair, rhs: f64) -> Result<SdpPair> {
    let sigma = x.rho1.add(&x.rho2)?;
    let delta = project_affine_sigma(&sigma, rhs)?.sub(&sigma)?.scale(0.5);
    Ok(SdpPair { rho1: x.rho1.add(&delta)?, rho2: x.rho2.add(&delta)? })
}

fn project_psd_pair(x: &SdpPair) -> Result<SdpPair> {
    Ok(SdpPair {
        rho1: LabeledOperator::new(x.rho1.layout().clone(), project_psd(x.rho1.matrix(), false))?,
        rho2: LabeledOperator::new(x.rho2.layout().clone(), project_psd(x.rho2.matrix(), false))?,
    })
}

#[derive(Debug, Clone)]
pub struct SolveParams {
    pub tol_feas: f64,
    pub tol_obj: f64,
    pub max_iter: usize,
    pub penalty: f64,
    /// starting point for the PSD iterate; defaults to the maximally mixed
    /// feasible point
    pub warm_start: Option<SdpPair>,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            tol_feas: 1e-8,
            tol_obj: 1e-4,
            max_iter: 50_000,
            penalty: 1.0,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub pair: CandidatePair,
    pub value: f64,
    pub feasibility: FeasibilityReport,
    pub gap_to_seven_eighths: f64,
    pub iterations: usize,
    pub converged: bool,
    pub elapsed_secs: f64,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pair: {}", self.pair)?;
        writeln!(f, "value: {:.12}", self.value)?;
        write!(f, "{}", self.feasibility)?;
        writeln!(f, "gap_to_7_8: {:.3e}", self.gap_to_seven_eighths)?;
        writeln!(f, "iterations: {}", self.iterations)?;
        writeln!(f, "converged: {}", self.converged)?;
        writeln!(f, "elapsed_secs: {:.3}", self.elapsed_secs)
    }
}

/// Maximizes the objective over the intersection of the affine set and the
/// PSD cone by alternating projections with dual multipliers (ADMM-style
/// splitting).  Deterministic for fixed inputs and parameters.
pub fn solve_sdp(problem: &SdpProblem, params: &SolveParams) -> Result<(SolveReport, SdpPair)> {
    let start = Instant::now();
    let c = SdpPair { rho1: problem.c1.canonicalize(), rho2: problem.c2.canonicalize() };
    let zero = LabeledOperator::zeros(canonical6());
    let mut z = params
        .warm_start
        .clone()
        .map(|w| Ok::<_, Error>(SdpPair { rho1: w.rho1.canonicalize(), rho2: w.rho2.canonicalize() }))
        .unwrap_or_else(|| Ok(maximally_mixed_point(problem.rhs)))?;
    let mut y = SdpPair { rho1: zero.clone(), rho2: zero };

    let scaled_c = SdpPair {
        rho1: c.rho1.scale(1.0 / params.penalty),
        rho2: c.rho2.scale(1.0 / params.penalty),
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut last_obj = objective_with(&c.rho1, &c.rho2, &z.rho1, &z.rho2)?;
    const CHECK_EVERY: usize = 5;

    while iterations < params.max_iter {
        // x-step: affine projection of z - y + C/penalty
        let arg = SdpPair {
            rho1: z.rho1.sub(&y.rho1)?.add(&scaled_c.rho1)?,
            rho2: z.rho2.sub(&y.rho2)?.add(&scaled_c.rho2)?,
        };
        let x = project_affine_pair(&arg, problem.rhs)?;
        // z-step: PSD projection of x + y
        z = project_psd_pair(&SdpPair {
            rho1: x.rho1.add(&y.rho1)?,
            rho2: x.rho2.add(&y.rho2)?,
        })?;
        // multiplier update
        y = SdpPair {
            rho1: y.rho1.add(&x.rho1.sub(&z.rho1)?)?,
            rho2: y.rho2.add(&x.rho2.sub(&z.rho2)?)?,
        };
        iterations += 1;

        if iterations % CHECK_EVERY == 0 || iterations == params.max_iter {
            // z is PSD by construction; measure its affine residual and the
            // objective drift
            let zp = project_affine_pair(&z, problem.rhs)?;
            let res = (zp.rho1.frobenius_distance(&z.rho1)?.powi(2)
                + zp.rho2.frobenius_distance(&z.rho2)?.powi(2))
            .sqrt();
            let obj = objective_with(&c.rho1, &c.rho2, &z.rho1, &z.rho2)?;
            if res <= params.tol_feas && (obj - last_obj).abs() <= params.tol_obj {
                converged = true;
                break;
            }
            last_obj = obj;
        }
    }

    let value = objective_with(&c.rho1, &c.rho2, &z.rho1, &z.rho2)?;
    let feasibility = check_primal_feasibility(&z.rho1, &z.rho2, problem.rhs, params.tol_feas)?;
    let report = SolveReport {
        pair: problem.pair,
        value,
        feasibility,
        gap_to_seven_eighths: value - 0.875 * problem.rhs,
        iterations,
        converged,
        elapsed_secs: start.elapsed().as_secs_f64(),
    };
    Ok((report, z))
}
