//! C ABI over the `whichpath` crate.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every function returns a
//! [`WpStatus`]; on failure [`wp_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use whichpath::campaign::{run_campaign, Campaign, CampaignConfig, CampaignError};
use whichpath::circuits::{CircuitFamily, GateModel, Observable, Simulator};
use whichpath::estimators::estimate;
use whichpath::fitting::{fit, FitOptions, FitResult, ModelSpec, Target, Tier};
use whichpath::gates::{bcnot, BcnotOrdering, BiasParams, BiasTerms, SqgeParams};
use whichpath::noise::OutcomeCounts;
use whichpath::stats::runs_test;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
pub enum WpFamily {
    WpX = 0,
    WpZ = 1,
    EraserX = 2,
    EraserZ = 3,
    Mzi = 4,
}

#[repr(C)]
pub enum WpObservable {
    X = 0,
    X0 = 1,
    X1 = 2,
    D = 3,
    Dm = 4,
}

#[repr(C)]
pub enum WpTarget {
    MziX = 0,
    X = 1,
    X0 = 2,
    X1 = 3,
    D = 4,
    Dm = 5,
}

#[repr(C)]
pub enum WpTier {
    Ideal = 0,
    CnotSqge = 1,
    Bcnot2Sqge = 2,
    Bcnot5Sqge = 3,
}

#[repr(C)]
pub enum WpOrdering {
    Plain = 0,
    Primed = 1,
    DoublePrimed = 2,
    TriplePrimed = 3,
}

/// Exact circuit simulator for a fixed gate-error model.
pub struct WpSimulator(Simulator);

/// Shot-sampled dataset with its configuration and calibration counts.
pub struct WpCampaign(Campaign);

/// Result of a weighted least-squares fit.
pub struct WpFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (WpStatus, String);

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> WpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WpStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            WpStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    (WpStatus::NullPointer, format!("{name} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    (WpStatus::InvalidArgument, message.into())
}

fn numerical(e: impl ToString) -> Failure {
    (WpStatus::Numerical, e.to_string())
}

fn campaign_failure(e: CampaignError) -> Failure {
    let status = match e {
        CampaignError::Config(_) => WpStatus::Config,
        CampaignError::Noise(_) => WpStatus::Numerical,
        CampaignError::Io { .. } | CampaignError::Format { .. } => WpStatus::Io,
    };
    (status, e.to_string())
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn in_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn five(p: *const f64) -> Option<[f64; 5]> {
    (!p.is_null()).then(|| std::slice::from_raw_parts(p, 5).try_into().unwrap())
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    let s = in_ref(p, name)?;
    let s = CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{name} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

fn family(v: i32) -> Result<CircuitFamily, Failure> {
    CircuitFamily::ALL.get(v as usize).copied().filter(|_| v >= 0).ok_or_else(|| invalid(format!("family {v}")))
}

fn observable(v: i32) -> Result<Observable, Failure> {
    Observable::ALL.get(v as usize).copied().filter(|_| v >= 0).ok_or_else(|| invalid(format!("observable {v}")))
}

fn target(v: i32) -> Result<Target, Failure> {
    const ALL: [Target; 6] = [Target::MziX, Target::X, Target::X0, Target::X1, Target::D, Target::Dm];
    ALL.get(v as usize).copied().filter(|_| v >= 0).ok_or_else(|| invalid(format!("target {v}")))
}

fn tier(v: i32) -> Result<Tier, Failure> {
    Tier::ALL.get(v as usize).copied().filter(|_| v >= 0).ok_or_else(|| invalid(format!("tier {v}")))
}

fn ordering(v: i32) -> Result<BcnotOrdering, Failure> {
    BcnotOrdering::ALL.get(v as usize).copied().filter(|_| v >= 0).ok_or_else(|| invalid(format!("ordering {v}")))
}

fn boxed<T>(out: *mut *mut T, value: T) {
    // callers have checked `out` for null
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a simulator. `theta` and `beta` point to five doubles each or are
/// null for error-free gates.
///
/// # Safety
/// Non-null pointers must be valid for the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn wp_simulator_new(theta: *const f64, beta: *const f64, out: *mut *mut WpSimulator) -> WpStatus {
    guard(|| {
        out_ref(out, "out")?;
        let mut model = five(theta).map_or(GateModel::IDEAL, |t| GateModel::with_sqge(SqgeParams::new(t)));
        if let Some(b) = five(beta) {
            model.entangler = GateModel::with_bias(BiasParams::new(b)).entangler;
        }
        boxed(out, WpSimulator(Simulator::new(&model)));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from [`wp_simulator_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wp_simulator_free(sim: *mut WpSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Writes the exact outcome probabilities `p(00), p(01), p(10), p(11)`.
///
/// # Safety
/// `out` must hold four doubles.
#[no_mangle]
pub unsafe extern "C" fn wp_simulator_probabilities(
    sim: *const WpSimulator,
    family_id: i32,
    phi: f64,
    alpha: f64,
    out: *mut f64,
) -> WpStatus {
    guard(|| {
        let sim = in_ref(sim, "sim")?;
        out_ref(out, "out")?;
        let p = sim.0.probabilities(family(family_id)?, phi, alpha);
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&p);
        Ok(())
    })
}

/// Exact observable value. `degenerate` (may be null) is set when the value
/// is the limit at a zero-probability conditioning point.
///
/// # Safety
/// Pointers must be valid; `degenerate` may be null.
#[no_mangle]
pub unsafe extern "C" fn wp_simulator_observable(
    sim: *const WpSimulator,
    family_id: i32,
    observable_id: i32,
    phi: f64,
    alpha: f64,
    value: *mut f64,
    degenerate: *mut bool,
) -> WpStatus {
    guard(|| {
        let sim = in_ref(sim, "sim")?;
        let value = out_ref(value, "value")?;
        let v = sim.0.observable(family(family_id)?, observable(observable_id)?, phi, alpha).map_err(|e| invalid(e.to_string()))?;
        *value = v.value;
        if let Some(d) = degenerate.as_mut() {
            *d = v.degenerate;
        }
        Ok(())
    })
}

/// Biased CNOT as a row-major 4×4 matrix split into real and imaginary parts.
///
/// # Safety
/// `beta` holds five doubles; `re` and `im` hold sixteen each.
#[no_mangle]
pub unsafe extern "C" fn wp_bcnot_matrix(
    beta: *const f64,
    ordering_id: i32,
    two_terms: bool,
    re: *mut f64,
    im: *mut f64,
) -> WpStatus {
    guard(|| {
        let b = five(beta).ok_or_else(|| null("beta"))?;
        out_ref(re, "re")?;
        out_ref(im, "im")?;
        let terms = if two_terms { BiasTerms::Two } else { BiasTerms::Five };
        let u = bcnot(&BiasParams::new(b), ordering(ordering_id)?, terms);
        let m = &u.matrix().0;
        let (re, im) = (std::slice::from_raw_parts_mut(re, 16), std::slice::from_raw_parts_mut(im, 16));
        for r in 0..4 {
            for c in 0..4 {
                re[4 * r + c] = m[r][c].re;
                im[4 * r + c] = m[r][c].im;
            }
        }
        Ok(())
    })
}

/// Estimate and standard error of an observable from counts `n00, n01, n10, n11`.
///
/// # Safety
/// `counts` holds four integers; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_estimate(
    observable_id: i32,
    counts: *const u64,
    value: *mut f64,
    std_error: *mut f64,
) -> WpStatus {
    guard(|| {
        let c = in_ref(counts, "counts")?;
        let (value, std_error) = (out_ref(value, "value")?, out_ref(std_error, "std_error")?);
        let c: [u64; 4] = std::slice::from_raw_parts(c, 4).try_into().unwrap();
        let e = estimate(observable(observable_id)?, &OutcomeCounts::new(c, 0)).map_err(numerical)?;
        *value = e.value;
        *std_error = e.std_error;
        Ok(())
    })
}

/// Wald-Wolfowitz runs test on the signs of `n` values.
///
/// # Safety
/// `values` holds `n` doubles; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_runs_test(
    values: *const f64,
    n: usize,
    runs: *mut usize,
    z: *mut f64,
    p_value: *mut f64,
) -> WpStatus {
    guard(|| {
        let v = in_ref(values, "values")?;
        let (runs, z, p_value) = (out_ref(runs, "runs")?, out_ref(z, "z")?, out_ref(p_value, "p_value")?);
        let r = runs_test(std::slice::from_raw_parts(v, n)).map_err(numerical)?;
        *runs = r.runs;
        *z = r.z;
        *p_value = r.p_value;
        Ok(())
    })
}

/// Loads a TOML config (or a dataset's `manifest.json`) and runs the campaign.
///
/// # Safety
/// `path` is a NUL-terminated UTF-8 string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_campaign_run(path: *const c_char, out: *mut *mut WpCampaign) -> WpStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        out_ref(out, "out")?;
        let cfg = CampaignConfig::load(&path).map_err(campaign_failure)?;
        boxed(out, WpCampaign(run_campaign(&cfg).map_err(campaign_failure)?));
        Ok(())
    })
}

/// Reads a dataset directory written by [`wp_campaign_write`] or the CLI.
///
/// # Safety
/// `dir` is a NUL-terminated UTF-8 string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_campaign_read(dir: *const c_char, out: *mut *mut WpCampaign) -> WpStatus {
    guard(|| {
        let dir = path_arg(dir, "dir")?;
        out_ref(out, "out")?;
        boxed(out, WpCampaign(Campaign::read(&dir).map_err(campaign_failure)?));
        Ok(())
    })
}

/// # Safety
/// `campaign` must be valid; `dir` is a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn wp_campaign_write(campaign: *const WpCampaign, dir: *const c_char) -> WpStatus {
    guard(|| {
        let c = in_ref(campaign, "campaign")?;
        c.0.write(&path_arg(dir, "dir")?).map_err(campaign_failure)
    })
}

/// Readout-mitigated copy of a campaign.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_campaign_mitigate(campaign: *const WpCampaign, out: *mut *mut WpCampaign) -> WpStatus {
    guard(|| {
        let c = in_ref(campaign, "campaign")?;
        out_ref(out, "out")?;
        boxed(out, WpCampaign(c.0.mitigated().map_err(numerical)?));
        Ok(())
    })
}

/// Number of grid points in the campaign.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_campaign_points(campaign: *const WpCampaign, points: *mut usize) -> WpStatus {
    guard(|| {
        *out_ref(points, "points")? = in_ref(campaign, "campaign")?.0.points.len();
        Ok(())
    })
}

/// # Safety
/// `campaign` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wp_campaign_free(campaign: *mut WpCampaign) {
    if !campaign.is_null() {
        drop(Box::from_raw(campaign));
    }
}

/// Fits the model of `target` at `tier` to the campaign with default options.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_fit_campaign(
    campaign: *const WpCampaign,
    target_id: i32,
    tier_id: i32,
    out: *mut *mut WpFit,
) -> WpStatus {
    guard(|| {
        let c = in_ref(campaign, "campaign")?;
        out_ref(out, "out")?;
        let target = target(target_id)?;
        if target.family() != c.0.config.family {
            return Err(invalid(format!("target {} needs a {:?} campaign", target.name(), target.family())));
        }
        let data = c.0.measurements(target.observable());
        let r = fit(&ModelSpec::new(target, tier(tier_id)?), &data, &FitOptions::default()).map_err(numerical)?;
        boxed(out, WpFit(r));
        Ok(())
    })
}

/// Number of free parameters of a fit.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_fit_param_count(fit: *const WpFit, count: *mut usize) -> WpStatus {
    guard(|| {
        *out_ref(count, "count")? = in_ref(fit, "fit")?.0.params.len();
        Ok(())
    })
}

/// Value and standard error of free parameter `index`. `name` (may be null)
/// receives up to `name_len` bytes of the NUL-terminated parameter name.
///
/// # Safety
/// Pointers must be valid; `name` must hold `name_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn wp_fit_param(
    fit: *const WpFit,
    index: usize,
    value: *mut f64,
    std_error: *mut f64,
    name: *mut c_char,
    name_len: usize,
) -> WpStatus {
    guard(|| {
        let f = &in_ref(fit, "fit")?.0;
        let (value, std_error) = (out_ref(value, "value")?, out_ref(std_error, "std_error")?);
        if index >= f.params.len() {
            return Err(invalid(format!("parameter index {index} of {}", f.params.len())));
        }
        *value = f.params[index];
        *std_error = f.std_errors[index];
        if !name.is_null() && name_len > 0 {
            let s = f.spec.names()[index].clone();
            let n = s.len().min(name_len - 1);
            ptr::copy_nonoverlapping(s.as_ptr().cast(), name, n);
            *name.add(n) = 0;
        }
        Ok(())
    })
}

/// Reduced chi-square of a fit.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wp_fit_chi2_red(fit: *const WpFit, chi2_red: *mut f64) -> WpStatus {
    guard(|| {
        *out_ref(chi2_red, "chi2_red")? = in_ref(fit, "fit")?.0.chi2_red;
        Ok(())
    })
}

/// # Safety
/// `fit` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wp_fit_free(fit: *mut WpFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}
