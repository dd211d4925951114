//! C interface to the spin-model and random-PEPS routines.
//!
//! Every function returns a [`SymrtnStatus`]. On failure the message is kept
//! per thread and can be read with [`symrtn_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use symrtn::group::FiniteGroup;
use symrtn::lattice::{build_lattice, Boundary, PermConfig, RegionSpec};
use symrtn::peps::{haar_average, PepsSpec};
use symrtn::spin::{
    action, entropy_estimate, exact_partition, solution_count_oracle, ActionParams, EntropyMethod,
    OracleLimits, OracleMethod, Variant, WeightMode,
};
use symrtn::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymrtnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MissingSymmetry = 3,
    BudgetExceeded = 4,
    Overflow = 5,
    Internal = 6,
}

/// Partition function without a boundary field.
pub const SYMRTN_Z0: u32 = 0;
/// Partition function with the region pinned to the cyclic permutation.
pub const SYMRTN_Z1: u32 = 1;

fn parse_variant(v: u32) -> Result<Variant, (SymrtnStatus, String)> {
    match v {
        SYMRTN_Z0 => Ok(Variant::Z0),
        SYMRTN_Z1 => Ok(Variant::Z1),
        _ => Err((
            SymrtnStatus::InvalidArgument,
            format!("unknown variant {v}"),
        )),
    }
}

/// Opaque model handle.
pub struct SymrtnModel {
    params: ActionParams,
}

/// Haar averages of `Tr ρ_A^n` (z1) and `(Tr ρ)^n` (z0).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SymrtnHaarAverage {
    pub z1_mean: f64,
    pub z1_stderr: f64,
    pub z0_mean: f64,
    pub z0_stderr: f64,
}

/// Entropy estimate; `std_error` is negative when not applicable.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SymrtnEntropy {
    pub value: f64,
    pub std_error: f64,
    /// 1 when the value is exact.
    pub exact: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SymrtnStatus {
    match err {
        Error::BudgetExceeded { .. } => SymrtnStatus::BudgetExceeded,
        Error::MissingSymmetry => SymrtnStatus::MissingSymmetry,
        _ => SymrtnStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SymrtnStatus, String)>) -> SymrtnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SymrtnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SymrtnStatus::Internal
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (SymrtnStatus, String)>;
}

impl<T> IntoFfi<T> for Result<T, Error> {
    fn ffi(self) -> Result<T, (SymrtnStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (SymrtnStatus, String) {
    (SymrtnStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(
    model: *const SymrtnModel,
) -> Result<&'a SymrtnModel, (SymrtnStatus, String)> {
    model.as_ref().ok_or_else(|| null("model"))
}

unsafe fn slice<'a, T>(
    ptr: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (SymrtnStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn write<T>(out: *mut T, value: T) -> Result<(), (SymrtnStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn symrtn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn symrtn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a model on a `width x height` lattice with uniform dimensions.
///
/// `group` is a name such as `"Z2"` or `"S3"`, or null for no symmetry.
/// `region` lists the sites of A. The handle must be released with [`symrtn_model_free`].
///
/// # Safety
/// Pointers must be valid for the given lengths; `group` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn symrtn_model_new(
    width: usize,
    height: usize,
    periodic: bool,
    d: usize,
    bond_dim: usize,
    group: *const c_char,
    n: usize,
    region: *const usize,
    region_len: usize,
    out: *mut *mut SymrtnModel,
) -> SymrtnStatus {
    guard(|| {
        let boundary = if periodic {
            Boundary::Periodic
        } else {
            Boundary::Open
        };
        let lattice = build_lattice(width, height, boundary).ffi()?;
        let group = if group.is_null() {
            None
        } else {
            let name = CStr::from_ptr(group).to_str().map_err(|_| {
                (
                    SymrtnStatus::InvalidArgument,
                    "group name is not UTF-8".to_string(),
                )
            })?;
            Some(FiniteGroup::by_name(name).ffi()?)
        };
        let sites = slice(region, region_len, "region")?;
        let region = RegionSpec::from_sites(&lattice, sites).ffi()?;
        let params = ActionParams::uniform(lattice, d, bond_dim, group, n, region).ffi()?;
        write(out, Box::into_raw(Box::new(SymrtnModel { params })))
    })
}

/// Releases a model. Null is accepted.
///
/// # Safety
/// `model` must come from [`symrtn_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn symrtn_model_free(model: *mut SymrtnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Selects oracle weights (`oracle = true`) or the closed-form wall weights.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn symrtn_model_set_oracle_weights(
    model: *mut SymrtnModel,
    oracle: bool,
) -> SymrtnStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        let mode = if oracle {
            WeightMode::Oracle
        } else {
            WeightMode::Formula
        };
        m.params = m.params.clone().with_weight_mode(mode);
        Ok(())
    })
}

/// Number of lattice sites.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn symrtn_model_num_sites(
    model: *const SymrtnModel,
    out: *mut usize,
) -> SymrtnStatus {
    guard(|| write(out, model_ref(model)?.params.num_sites()))
}

/// `log Z` by exhaustive enumeration.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn symrtn_log_partition(
    model: *const SymrtnModel,
    variant: u32,
    out: *mut f64,
) -> SymrtnStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(
            out,
            exact_partition(&m.params, parse_variant(variant)?)
                .ffi()?
                .log_z,
        )
    })
}

unsafe fn config(
    m: &SymrtnModel,
    labels: *const usize,
    len: usize,
) -> Result<PermConfig, (SymrtnStatus, String)> {
    let values = slice(labels, len, "labels")?;
    if values.len() != m.params.num_sites() {
        return Err((
            SymrtnStatus::InvalidArgument,
            format!("{} labels for {} sites", values.len(), m.params.num_sites()),
        ));
    }
    PermConfig::new(m.params.replicas(), values.to_vec()).ffi()
}

/// Action of a configuration given as replica-permutation indices, one per site.
///
/// # Safety
/// `labels` must hold `len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn symrtn_action(
    model: *const SymrtnModel,
    labels: *const usize,
    len: usize,
    variant: u32,
    out: *mut f64,
) -> SymrtnStatus {
    guard(|| {
        let m = model_ref(model)?;
        let c = config(m, labels, len)?;
        write(out, action(&c, &m.params, parse_variant(variant)?).ffi()?)
    })
}

/// Number of group assignments satisfying every edge constraint of a configuration.
///
/// # Safety
/// `labels` must hold `len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn symrtn_solution_count(
    model: *const SymrtnModel,
    labels: *const usize,
    len: usize,
    out: *mut u64,
) -> SymrtnStatus {
    guard(|| {
        let m = model_ref(model)?;
        let group = m.params.group().ok_or((
            SymrtnStatus::MissingSymmetry,
            "model has no group".to_string(),
        ))?;
        let c = config(m, labels, len)?;
        let count = solution_count_oracle(
            &c,
            group,
            m.params.lattice(),
            m.params.replicas(),
            OracleMethod::Clusters,
            &OracleLimits::default(),
        )
        .ffi()?;
        let count = u64::try_from(count).map_err(|_| {
            (
                SymrtnStatus::Overflow,
                format!("count {count} exceeds 64 bits"),
            )
        })?;
        write(out, count)
    })
}

fn entropy(
    m: &SymrtnModel,
    method: EntropyMethod,
    out: *mut SymrtnEntropy,
) -> Result<(), (SymrtnStatus, String)> {
    let e = entropy_estimate(&m.params, method).ffi()?;
    write(
        out,
        SymrtnEntropy {
            value: e.value,
            std_error: e.stderr.unwrap_or(-1.0),
            exact: (e.label == "exact") as i32,
        },
    )
}

/// Renyi entropy from exact enumeration of both partition functions.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn symrtn_entropy_exact(
    model: *const SymrtnModel,
    out: *mut SymrtnEntropy,
) -> SymrtnStatus {
    guard(|| entropy(model_ref(model)?, EntropyMethod::ExactEnumeration, out))
}

/// Renyi entropy from the ground-state action difference.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn symrtn_entropy_ground_state(
    model: *const SymrtnModel,
    out: *mut SymrtnEntropy,
) -> SymrtnStatus {
    guard(|| entropy(model_ref(model)?, EntropyMethod::GroundState, out))
}

/// Renyi entropy from a Metropolis estimate of `Z1 / Z0`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn symrtn_entropy_monte_carlo(
    model: *const SymrtnModel,
    steps: u64,
    seed: u64,
    out: *mut SymrtnEntropy,
) -> SymrtnStatus {
    guard(|| {
        entropy(
            model_ref(model)?,
            EntropyMethod::MonteCarlo { steps, seed },
            out,
        )
    })
}

/// Haar averages over `samples` random PEPS drawn with the model's dimensions and group.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn symrtn_haar_average(
    model: *const SymrtnModel,
    samples: u64,
    seed: u64,
    out: *mut SymrtnHaarAverage,
) -> SymrtnStatus {
    guard(|| {
        let p = &model_ref(model)?.params;
        let spec = PepsSpec::new(
            p.lattice().clone(),
            p.phys_dims().to_vec(),
            p.bond_dims().to_vec(),
            p.group().cloned(),
        )
        .ffi()?;
        let avg = haar_average(&spec, p.region(), p.n() as u32, samples, seed).ffi()?;
        write(
            out,
            SymrtnHaarAverage {
                z1_mean: avg.z1.mean,
                z1_stderr: avg.z1.stderr,
                z0_mean: avg.z0.mean,
                z0_stderr: avg.z0.stderr,
            },
        )
    })
}
