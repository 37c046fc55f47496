//! C interface to `coalesce`.
//!
//! Every fallible call returns an `int32_t` status: `COALESCE_OK` on success,
//! otherwise one of the `COALESCE_ERR_*` codes. The message for the most
//! recent failure on the calling thread is available from
//! `coalesce_last_error_message`. Handles are opaque and must be released with
//! the matching `*_free` function.

use coalesce::amplitude::{self, AmplitudePrediction, Regime};
use coalesce::forcing::{ell_m, Forcing};
use coalesce::ode::{self, Trajectory};
use coalesce::recurrence::{self, CoeffSeq, OmegaCcOptions};
use coalesce::{CPoint, Error, ForcingSpec, Sigma};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

pub const COALESCE_OK: i32 = 0;
pub const COALESCE_ERR_SINGULARITY_HIT: i32 = 1;
pub const COALESCE_ERR_STEP_FAILURE: i32 = 2;
pub const COALESCE_ERR_DIVISION_NEAR_ZERO: i32 = 3;
pub const COALESCE_ERR_WINDOW_TOO_SHORT: i32 = 4;
pub const COALESCE_ERR_NO_WAVE_DETECTED: i32 = 5;
pub const COALESCE_ERR_PATH_TOO_CLOSE: i32 = 6;
pub const COALESCE_ERR_QUADRATURE_FAILURE: i32 = 7;
pub const COALESCE_ERR_BRANCH_CUT_HIT: i32 = 8;
pub const COALESCE_ERR_SEED_FAILURE: i32 = 9;
pub const COALESCE_ERR_CORRECTOR_DIVERGENCE: i32 = 10;
pub const COALESCE_ERR_DOMAIN: i32 = 11;
pub const COALESCE_ERR_OVERFLOW: i32 = 12;
pub const COALESCE_ERR_NON_CONVERGENCE: i32 = 13;
pub const COALESCE_ERR_BRANCH_MISMATCH: i32 = 14;
pub const COALESCE_ERR_ILL_CONDITIONED: i32 = 15;
pub const COALESCE_ERR_WRONG_REGIME: i32 = 16;
pub const COALESCE_ERR_NO_STOKES_CROSSING: i32 = 17;
pub const COALESCE_ERR_INVALID_SPEC: i32 = 18;
pub const COALESCE_ERR_IO: i32 = 19;
pub const COALESCE_ERR_NULL_POINTER: i32 = 100;
pub const COALESCE_ERR_PANIC: i32 = 101;

pub const COALESCE_REGIME_SINGLE: i32 = 0;
pub const COALESCE_REGIME_SEPARATED: i32 = 1;
pub const COALESCE_REGIME_COALESCING: i32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CoalesceComplex {
    pub re: f64,
    pub im: f64,
}

impl From<CPoint> for CoalesceComplex {
    fn from(z: CPoint) -> Self {
        CoalesceComplex { re: z.re, im: z.im }
    }
}

impl From<CoalesceComplex> for CPoint {
    fn from(z: CoalesceComplex) -> Self {
        CPoint::new(z.re, z.im)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CoalesceAmplitude {
    pub regime: i32,
    pub amplitude: f64,
    /// Coefficient of −1/ε in the exponent.
    pub exponent_rate: f64,
    /// Coefficient of −1/√ε in the exponent.
    pub secondary_rate: f64,
    pub prefactor: f64,
    pub phase: f64,
}

impl From<&AmplitudePrediction> for CoalesceAmplitude {
    fn from(p: &AmplitudePrediction) -> Self {
        CoalesceAmplitude {
            regime: match p.regime {
                Regime::Single => COALESCE_REGIME_SINGLE,
                Regime::Separated => COALESCE_REGIME_SEPARATED,
                Regime::Coalescing => COALESCE_REGIME_COALESCING,
            },
            amplitude: p.amplitude,
            exponent_rate: p.exponent_rate,
            secondary_rate: p.secondary_rate,
            prefactor: p.prefactor,
            phase: p.phase,
        }
    }
}

/// Forcing family and parameters.
pub struct CoalesceForcing {
    spec: ForcingSpec,
}

/// ODE solution sampled on the positive real axis.
pub struct CoalesceTrajectory {
    traj: Trajectory,
}

/// Late-order coefficient sequence of an inner problem.
pub struct CoalesceSequence {
    seq: CoeffSeq,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => COALESCE_OK,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            e.code()
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            COALESCE_ERR_NULL_POINTER
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            COALESCE_ERR_PANIC
        }
    }
}

fn sigma(num: i64, den: i64) -> Result<Sigma, Error> {
    if den == 0 {
        return Err(Error::InvalidSpec("sigma denominator is zero".into()));
    }
    Ok(Sigma::new(num, den))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

fn boxed<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL, or
/// 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn coalesce_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Single singularity of strength num/den at w = −a.
///
/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn coalesce_forcing_single(a: f64, num: i64, den: i64, out_handle: *mut *mut CoalesceForcing) -> i32 {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let spec = ForcingSpec::single(a, sigma(num, den)?)?;
        boxed(slot, CoalesceForcing { spec });
        Ok(())
    })
}

/// Two singularities at −a1 and −a2.
///
/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn coalesce_forcing_separated(
    a1: f64,
    a2: f64,
    num1: i64,
    den1: i64,
    num2: i64,
    den2: i64,
    out_handle: *mut *mut CoalesceForcing,
) -> i32 {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let spec = ForcingSpec::separated(a1, a2, sigma(num1, den1)?, sigma(num2, den2)?)?;
        boxed(slot, CoalesceForcing { spec });
        Ok(())
    })
}

/// Two singularities at −a ± β ε^{ℓ/m}.
///
/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn coalesce_forcing_coalescing(
    a: f64,
    beta: f64,
    num1: i64,
    den1: i64,
    num2: i64,
    den2: i64,
    out_handle: *mut *mut CoalesceForcing,
) -> i32 {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let spec = ForcingSpec::coalescing(a, beta, sigma(num1, den1)?, sigma(num2, den2)?)?;
        boxed(slot, CoalesceForcing { spec });
        Ok(())
    })
}

/// q_s(w) at the given ε.
///
/// # Safety
/// `f` must come from a `coalesce_forcing_*` constructor; `q` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_forcing_q(f: *const CoalesceForcing, epsilon: f64, w: CoalesceComplex, q: *mut CoalesceComplex) -> i32 {
    guard(|| {
        let f = get(f, "forcing")?;
        let q = out(q, "q")?;
        *q = Forcing::new(f.spec, epsilon).q(w.into())?.into();
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coalesce_forcing_free(f: *mut CoalesceForcing) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Integrates the ODE from w0 to w_end with tolerance tol.
///
/// # Safety
/// `f` must be a live forcing handle; `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_integrate(
    f: *const CoalesceForcing,
    epsilon: f64,
    w0: f64,
    w_end: f64,
    tol: f64,
    out_handle: *mut *mut CoalesceTrajectory,
) -> i32 {
    guard(|| {
        let f = get(f, "forcing")?;
        let slot = out(out_handle, "out_handle")?;
        let traj = ode::integrate_phi(&f.spec, epsilon, w0, w_end, tol)?;
        boxed(slot, CoalesceTrajectory { traj });
        Ok(())
    })
}

/// Number of stored samples, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn coalesce_trajectory_len(t: *const CoalesceTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.traj.samples.len())
}

/// # Safety
/// `t` must be a live trajectory handle; `w` and `phi` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_trajectory_sample(t: *const CoalesceTrajectory, i: usize, w: *mut f64, phi: *mut CoalesceComplex) -> i32 {
    guard(|| {
        let t = get(t, "trajectory")?;
        let (w, phi) = (out(w, "w")?, out(phi, "phi")?);
        let &(ws, ps) = t
            .traj
            .samples
            .get(i)
            .ok_or_else(|| Error::DomainError(format!("sample {i} out of range")))?;
        *w = ws;
        *phi = ps.into();
        Ok(())
    })
}

/// Wave amplitude and wavelength over [lo, hi]; pass NaN for both to use the
/// last 40% of the trajectory.
///
/// # Safety
/// `t` must be a live trajectory handle; `amplitude` and `wavelength` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_trajectory_measure(
    t: *const CoalesceTrajectory,
    lo: f64,
    hi: f64,
    amplitude: *mut f64,
    wavelength: *mut f64,
) -> i32 {
    guard(|| {
        let t = get(t, "trajectory")?;
        let (amp, wl) = (out(amplitude, "amplitude")?, out(wavelength, "wavelength")?);
        let window = if lo.is_nan() && hi.is_nan() { ode::default_window(&t.traj) } else { (lo, hi) };
        let m = ode::measure_wave(&t.traj, window)?;
        *amp = m.amplitude;
        *wl = m.wavelength;
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coalesce_trajectory_free(t: *mut CoalesceTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Inner coefficients A_0..A_{n_max} for one singularity of strength num/den.
///
/// # Safety
/// `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_sequence_separated(num: i64, den: i64, n_max: usize, out_handle: *mut *mut CoalesceSequence) -> i32 {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let seq = recurrence::inner_separated(sigma(num, den)?, n_max)?;
        boxed(slot, CoalesceSequence { seq });
        Ok(())
    })
}

/// Inner coefficients for a coalescing pair; ℓ and m follow from σ₁ + σ₂.
///
/// # Safety
/// `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_sequence_coalescing(
    num1: i64,
    den1: i64,
    num2: i64,
    den2: i64,
    a: f64,
    beta: f64,
    n_max: usize,
    out_handle: *mut *mut CoalesceSequence,
) -> i32 {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let (s1, s2) = (sigma(num1, den1)?, sigma(num2, den2)?);
        let (ell, m) = ell_m(s1 + s2);
        let seq = recurrence::inner_coalescing(s1, s2, a, beta, ell, m, n_max)?;
        boxed(slot, CoalesceSequence { seq });
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live sequence handle.
#[no_mangle]
pub unsafe extern "C" fn coalesce_sequence_len(s: *const CoalesceSequence) -> usize {
    s.as_ref().map_or(0, |s| s.seq.len())
}

/// ln A_n (principal imaginary part). Fails with COALESCE_ERR_DOMAIN when A_n = 0.
///
/// # Safety
/// `s` must be a live sequence handle; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_sequence_ln(s: *const CoalesceSequence, n: usize, value: *mut CoalesceComplex) -> i32 {
    guard(|| {
        let s = get(s, "sequence")?;
        let v = out(value, "value")?;
        let l = s.seq.ln(n).ok_or_else(|| Error::DomainError(format!("A_{n} is zero or out of range")))?;
        *v = l.into();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coalesce_sequence_free(s: *mut CoalesceSequence) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Ω(σ) for a single singularity.
///
/// # Safety
/// `omega` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_omega_separated(num: i64, den: i64, omega: *mut f64) -> i32 {
    guard(|| {
        let o = out(omega, "omega")?;
        *o = recurrence::omega_separated(sigma(num, den)?)?.omega;
        Ok(())
    })
}

/// Ω^cc and τ for a coalescing pair; n_max = 0 selects the default.
///
/// # Safety
/// `omega` and `tau` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_omega_cc(
    num1: i64,
    den1: i64,
    num2: i64,
    den2: i64,
    a: f64,
    beta: f64,
    n_max: usize,
    omega: *mut f64,
    tau: *mut f64,
) -> i32 {
    guard(|| {
        let (o, t) = (out(omega, "omega")?, out(tau, "tau")?);
        let (s1, s2) = (sigma(num1, den1)?, sigma(num2, den2)?);
        let (ell, m) = ell_m(s1 + s2);
        let mut opts = OmegaCcOptions::default();
        if n_max > 0 {
            opts.n_max = n_max;
        }
        let fit = recurrence::omega_cc(s1, s2, a, beta, ell, m, opts)?;
        *o = fit.omega;
        *t = fit.tau;
        Ok(())
    })
}

/// Far-field single-singularity prediction.
///
/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_amp_single(a: f64, num: i64, den: i64, epsilon: f64, omega: f64, result: *mut CoalesceAmplitude) -> i32 {
    guard(|| {
        let r = out(result, "result")?;
        *r = (&amplitude::amp_single(a, sigma(num, den)?, epsilon, omega, None)?).into();
        Ok(())
    })
}

/// Far-field coalescing prediction; requires σ₁ + σ₂ = 1/3.
///
/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_amp_coalescing(
    a: f64,
    beta: f64,
    num1: i64,
    den1: i64,
    num2: i64,
    den2: i64,
    epsilon: f64,
    omega_cc: f64,
    result: *mut CoalesceAmplitude,
) -> i32 {
    guard(|| {
        let r = out(result, "result")?;
        let p = amplitude::amp_coalescing(a, beta, sigma(num1, den1)?, sigma(num2, den2)?, epsilon, omega_cc, None)?;
        *r = (&p).into();
        Ok(())
    })
}

/// Magnitude of the coherent separated wave in the far field.
///
/// # Safety
/// `f` must be a live separated forcing handle; `amplitude` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalesce_amp_separated_total(f: *const CoalesceForcing, epsilon: f64, amplitude: *mut f64) -> i32 {
    guard(|| {
        let f = get(f, "forcing")?;
        let a = out(amplitude, "amplitude")?;
        *a = amplitude::amp_separated_total(&f.spec, epsilon, &|s| recurrence::omega_separated(s).map(|e| e.omega), None)?;
        Ok(())
    })
}
