//! Monte Carlo simulation of the unitary-comparison protocol.
//!
//! A singlet is shared between one sample input and the target input; both
//! gates act on their halves, and a singlet-vs-rest measurement decides the
//! guess.  Since (V (x) V)|psi-> = det(V)|psi->, identical gates always
//! yield the singlet outcome, so that outcome maps to the "same" guess.

use std::fmt;

use rayon::prelude::*;

use crate::haar::{sample_haar_su2, singlet_overlap, RngStream, UnitarySample};

/// One protocol run: the two candidate gates and which one the target is.
#[derive(Debug, Clone)]
pub struct ProtocolInstance {
    pub u1: UnitarySample,
    pub u2: UnitarySample,
    /// true target index, 1 or 2
    pub t: u8,
}

/// Which sample slot shares the singlet with the target.  Both conventions
/// give the same ESP by symmetry of the Haar draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GuessConvention {
    #[default]
    CompareFirst,
    CompareSecond,
}

/// Probability that the comparison protocol guesses correctly on this
/// instance.  With the target matching the compared sample the singlet
/// outcome is certain and the guess is right; otherwise the protocol errs
/// exactly on the singlet outcome, which occurs with probability
/// |<psi-| U_t (x) U_c |psi->|^2.
pub fn comparison_success_prob(inst: &ProtocolInstance) -> f64 {
    comparison_success_prob_with(inst, GuessConvention::CompareFirst)
}

pub fn comparison_success_prob_with(inst: &ProtocolInstance, conv: GuessConvention) -> f64 {
    let matched = match conv {
        GuessConvention::CompareFirst => 1,
        GuessConvention::CompareSecond => 2,
    };
    if inst.t == matched {
        1.0
    } else {
        let ov = singlet_overlap(inst.u1.matrix(), inst.u2.matrix());
        (1.0 - ov.norm_sqr()).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// average the exact per-instance success probabilities
    Exact,
    /// draw one Bernoulli measurement outcome per trial
    Shots,
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimMode::Exact => write!(f, "exact-probability"),
            SimMode::Shots => write!(f, "shot-sampled"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub trials: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub mean_esp: f64,
    pub std_error: f64,
    pub elapsed_secs: f64,
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(f, "mean_esp: {:.6}", self.mean_esp)?;
        writeln!(f, "std_error: {:.3e}", self.std_error)?;
        writeln!(f, "elapsed_secs: {:.3}", self.elapsed_secs)
    }
}

/// Per-trial contribution: the success probability averaged over the two
/// equally likely targets (exact mode), or the empirical indicator of one
/// simulated run with a fair-coin target (shots mode).
fn trial_value(stream: &mut RngStream, mode: SimMode, conv: GuessConvention) -> f64 {
    let u1 = sample_haar_su2(stream);
    let u2 = sample_haar_su2(stream);
    match mode {
        SimMode::Exact => {
            let p1 = comparison_success_prob_with(&ProtocolInstance { u1: u1.clone(), u2: u2.clone(), t: 1 }, conv);
            let p2 = comparison_success_prob_with(&ProtocolInstance { u1, u2, t: 2 }, conv);
            0.5 * (p1 + p2)
        }
        SimMode::Shots => {
            let t = if stream.uniform() < 0.5 { 1 } else { 2 };
            let p = comparison_success_prob_with(&ProtocolInstance { u1, u2, t }, conv);
            if stream.uniform() < p {
                1.0
            } else {
                0.0
            }
        }
    }
}

pub fn estimate_esp(trials: u64, seed: u64, mode: SimMode) -> SimReport {
    estimate_esp_with(trials, seed, mode, GuessConvention::CompareFirst)
}

/// Deterministic for fixed (trials, seed, mode, convention): trial i always
/// uses substream i, and chunk sums are reduced in index order regardless of
/// worker count.
pub fn estimate_esp_with(
    trials: u64,
    seed: u64,
    mode: SimMode,
    conv: GuessConvention,
) -> SimReport {
    let start = std::time::Instant::now();
    let root = RngStream::from_seed(seed);
    const CHUNK: u64 = 4096;
    let n_chunks = trials.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(trials);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for trial in lo..hi {
                let mut stream = root.substream(trial);
                let v = trial_value(&mut stream, mode, conv);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(s, q)| (a + s, b + q));

    let n = trials as f64;
    let mean_esp = sum / n;
    let variance = (sum_sq / n - mean_esp * mean_esp).max(0.0);
    let std_error = if trials > 1 { (variance / (n - 1.0)).sqrt() } else { 0.0 };
    SimReport {
        trials,
        seed,
        mode,
        mean_esp,
        std_error,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

/// Monte Carlo estimate of the Haar-average squared singlet overlap
/// between two independent gates; the exact value is 1/4.
pub fn haar_mean_overlap(trials: u64, seed: u64) -> f64 {
    let root = RngStream::from_seed(seed);
    const CHUNK: u64 = 4096;
    let n_chunks = trials.div_ceil(CHUNK);
    let sum: f64 = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(trials);
            let mut acc = 0.0;
            for trial in lo..hi {
                let mut stream = root.substream(trial);
                let u1 = sample_haar_su2(&mut stream);
                let u2 = sample_haar_su2(&mut stream);
                acc += singlet_overlap(u1.matrix(), u2.matrix()).norm_sqr();
            }
            acc
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    sum / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;

    use crate::tensor::C64;

    #[test]
    fn success_prob_known_cases() {
        let id = UnitarySample::identity();
        // identical gates, target is the mismatched one: certain failure
        let p = comparison_success_prob(&ProtocolInstance { u1: id.clone(), u2: id.clone(), t: 2 });
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-15);
        // matched target always succeeds
        let mut s = RngStream::from_seed(1);
        for _ in 0..100 {
            let u = sample_haar_su2(&mut s);
            let p = comparison_success_prob(&ProtocolInstance { u1: u.clone(), u2: u, t: 1 });
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
        }
        // traceless second gate: <psi-|I (x) B|psi-> = tr(B)/2 = 0
        let ix = UnitarySample::from_matrix_unchecked(Matrix2::new(
            C64::new(0.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ));
        let p = comparison_success_prob(&ProtocolInstance { u1: id, u2: ix, t: 2 });
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn probs_stay_in_unit_interval() {
        let mut s = RngStream::from_seed(2);
        for i in 0..100_000 {
            let u1 = sample_haar_su2(&mut s);
            let u2 = sample_haar_su2(&mut s);
            let t = if i % 2 == 0 { 1 } else { 2 };
            let p = comparison_success_prob(&ProtocolInstance { u1, u2, t });
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn exact_mode_hits_seven_eighths() {
        let rep = estimate_esp(100_000, 7, SimMode::Exact);
        assert!(rep.std_error < 6e-4, "std_error {}", rep.std_error);
        assert!(
            (rep.mean_esp - 0.875).abs() <= 5.0 * rep.std_error,
            "mean {} se {}",
            rep.mean_esp,
            rep.std_error
        );
    }

    #[test]
    fn deterministic_and_single_trial() {
        let a = estimate_esp(1, 99, SimMode::Exact);
        let b = estimate_esp(1, 99, SimMode::Exact);
        assert_eq!(a.mean_esp, b.mean_esp);
        assert_eq!(a.std_error, 0.0);
        let c = estimate_esp(5000, 99, SimMode::Exact);
        let d = estimate_esp(5000, 99, SimMode::Exact);
        assert_eq!(c.mean_esp, d.mean_esp);
    }

    #[test]
    fn shots_mode_agrees_with_exact() {
        let exact = estimate_esp(20_000, 11, SimMode::Exact);
        let shots = estimate_esp(100_000, 13, SimMode::Shots);
        assert!(
            (exact.mean_esp - shots.mean_esp).abs() < 0.02,
            "exact {} shots {}",
            exact.mean_esp,
            shots.mean_esp
        );
    }

    #[test]
    fn mirrored_convention_matches() {
        let a = estimate_esp_with(50_000, 21, SimMode::Exact, GuessConvention::CompareFirst);
        let b = estimate_esp_with(50_000, 22, SimMode::Exact, GuessConvention::CompareSecond);
        let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean_esp - b.mean_esp).abs() <= 5.0 * combined);
    }

    #[test]
    fn pre_post_rotation_invariance() {
        // rotating both candidates by shared Haar W, V leaves the ESP
        // distribution unchanged; compare two independent estimators
        let root = RngStream::from_seed(31);
        const N: u64 = 50_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for trial in 0..N {
            let mut s = root.substream(trial);
            let u1 = sample_haar_su2(&mut s);
            let u2 = sample_haar_su2(&mut s);
            let w = sample_haar_su2(&mut s);
            let v = sample_haar_su2(&mut s);
            let rot = |u: &UnitarySample| UnitarySample::from_matrix_unchecked(
                w.matrix() * u.matrix() * v.matrix(),
            );
            let inst1 = ProtocolInstance { u1: rot(&u1), u2: rot(&u2), t: 1 };
            let inst2 = ProtocolInstance { u1: rot(&u1), u2: rot(&u2), t: 2 };
            let val = 0.5 * (comparison_success_prob(&inst1) + comparison_success_prob(&inst2));
            sum += val;
            sum_sq += val * val;
        }
        let mean = sum / N as f64;
        let se = ((sum_sq / N as f64 - mean * mean) / (N as f64 - 1.0)).sqrt();
        let plain = estimate_esp(N, 32, SimMode::Exact);
        let combined = (se * se + plain.std_error * plain.std_error).sqrt();
        assert!((mean - plain.mean_esp).abs() <= 5.0 * combined);
    }

    #[test]
    fn haar_mean_overlap_is_quarter() {
        let est = haar_mean_overlap(100_000, 5);
        assert!((est - 0.25).abs() <= 0.005, "estimate {est}");
        assert!((0.0..=1.0).contains(&est));
    }
}
