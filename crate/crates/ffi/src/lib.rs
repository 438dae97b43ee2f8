//! C ABI for the dsmn library.
//!
//! Conventions:
//! - Every fallible function returns an `int32_t` status: 0 success,
//!   1 usage, 2 numeric/degenerate, 3 resource, 4 null pointer / panic.
//!   [`dsmn_last_error_message`] returns a thread-local description of the
//!   most recent failure.
//! - `DsmnCounts` is an opaque handle created by [`dsmn_counts_new`] and
//!   released by [`dsmn_counts_free`]; no other ownership crosses the
//!   boundary.
//! - All functions are thread-safe; handles are immutable after creation
//!   and may be shared across threads.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dsmn::dsm::{pqr_cell_leq, pqr_cell_leq_mc, CountVector};
use dsmn::idm::{idm_cell_leq_bounds, jeffreys_prob};
use dsmn::linkage::acceptance_rate;
use dsmn::rng::Seed;
use dsmn::Error;

pub const DSMN_OK: i32 = 0;
pub const DSMN_ERR_USAGE: i32 = 1;
pub const DSMN_ERR_DOMAIN: i32 = 2;
pub const DSMN_ERR_RESOURCE: i32 = 3;
pub const DSMN_ERR_NULL: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).expect("interior NULs removed");
    });
}

fn code_of(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => DSMN_ERR_USAGE,
        Error::Domain(_) | Error::Degenerate(_) => DSMN_ERR_DOMAIN,
        Error::Resource(_) => DSMN_ERR_RESOURCE,
    }
}

/// Run a fallible body, translating errors and panics into status codes.
fn guarded<F: FnOnce() -> Result<(), Error>>(body: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DSMN_OK,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            code_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            DSMN_ERR_NULL
        }
    }
}

/// Opaque multinomial count vector.
pub struct DsmnCounts {
    inner: CountVector,
}

/// A (p, q, r) triple: probability for, against, and "don't know".
#[repr(C)]
#[derive(Copy, Clone, Debug, Default)]
pub struct DsmnPqr {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

/// Lower/upper probability bounds.
#[repr(C)]
#[derive(Copy, Clone, Debug, Default)]
pub struct DsmnBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dsmn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Description of the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never NULL.
#[no_mangle]
pub extern "C" fn dsmn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a count-vector handle from `k` cell counts. On success writes the
/// new handle to `out` and returns 0.
///
/// # Safety
/// `counts` must point to `k` readable `uint64_t`s and `out` must be a
/// valid, writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dsmn_counts_new(
    counts: *const u64,
    k: usize,
    out: *mut *mut DsmnCounts,
) -> i32 {
    if counts.is_null() || out.is_null() {
        set_error("NULL pointer argument");
        return DSMN_ERR_NULL;
    }
    let slice = std::slice::from_raw_parts(counts, k);
    guarded(|| {
        let inner = CountVector::new(slice.to_vec())?;
        *out = Box::into_raw(Box::new(DsmnCounts { inner }));
        Ok(())
    })
}

/// Release a handle created by [`dsmn_counts_new`]. NULL is a no-op.
///
/// # Safety
/// `handle` must be NULL or a pointer previously returned by
/// [`dsmn_counts_new`] that has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn dsmn_counts_free(handle: *mut DsmnCounts) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn borrow<'a>(handle: *const DsmnCounts) -> Option<&'a CountVector> {
    handle.as_ref().map(|h| &h.inner)
}

/// Closed-form (p, q, r) for the assertion {theta_k <= theta0}. `cell` is
/// zero-based.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsmn_pqr_cell_leq(
    handle: *const DsmnCounts,
    cell: usize,
    theta0: f64,
    out: *mut DsmnPqr,
) -> i32 {
    let (Some(counts), false) = (borrow(handle), out.is_null()) else {
        set_error("NULL pointer argument");
        return DSMN_ERR_NULL;
    };
    guarded(|| {
        let pqr = pqr_cell_leq(counts, cell, theta0)?;
        *out = DsmnPqr { p: pqr.p, q: pqr.q, r: pqr.r };
        Ok(())
    })
}

/// Monte-Carlo (p, q, r) for {theta_k <= theta0} with `n_draws` posterior
/// draws; deterministic in `seed`.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsmn_pqr_cell_leq_mc(
    handle: *const DsmnCounts,
    cell: usize,
    theta0: f64,
    n_draws: u64,
    seed: u64,
    out: *mut DsmnPqr,
) -> i32 {
    let (Some(counts), false) = (borrow(handle), out.is_null()) else {
        set_error("NULL pointer argument");
        return DSMN_ERR_NULL;
    };
    guarded(|| {
        let s = pqr_cell_leq_mc(counts, cell, theta0, n_draws, Seed(seed))?;
        *out = DsmnPqr { p: s.pqr.p, q: s.pqr.q, r: s.pqr.r };
        Ok(())
    })
}

/// Imprecise-Dirichlet lower/upper probabilities for {theta_k <= theta0}
/// at prior strength `s`.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsmn_idm_cell_leq_bounds(
    handle: *const DsmnCounts,
    cell: usize,
    theta0: f64,
    s: f64,
    out: *mut DsmnBounds,
) -> i32 {
    let (Some(counts), false) = (borrow(handle), out.is_null()) else {
        set_error("NULL pointer argument");
        return DSMN_ERR_NULL;
    };
    guarded(|| {
        let b = idm_cell_leq_bounds(counts, cell, theta0, s)?;
        *out = DsmnBounds { lower: b.lower, upper: b.upper };
        Ok(())
    })
}

/// Jeffreys-prior posterior probability of {theta_k <= theta0}.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsmn_jeffreys_prob(
    handle: *const DsmnCounts,
    cell: usize,
    theta0: f64,
    out: *mut f64,
) -> i32 {
    let (Some(counts), false) = (borrow(handle), out.is_null()) else {
        set_error("NULL pointer argument");
        return DSMN_ERR_NULL;
    };
    guarded(|| {
        *out = jeffreys_prob(counts, cell, theta0)?;
        Ok(())
    })
}

/// Linkage-model acceptance (non-conflict) rate over `proposals` posterior
/// draws; requires a four-category handle. Writes the rate and its binomial
/// standard error.
///
/// # Safety
/// `handle` must be a live handle; `rate` and `standard_error` writable.
#[no_mangle]
pub unsafe extern "C" fn dsmn_linkage_acceptance_rate(
    handle: *const DsmnCounts,
    proposals: u64,
    seed: u64,
    rate: *mut f64,
    standard_error: *mut f64,
) -> i32 {
    let (Some(counts), false) = (borrow(handle), rate.is_null() || standard_error.is_null())
    else {
        set_error("NULL pointer argument");
        return DSMN_ERR_NULL;
    };
    guarded(|| {
        let rep = acceptance_rate(counts, proposals, Seed(seed))?;
        *rate = rep.rate;
        *standard_error = rep.standard_error;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    unsafe fn make(counts: &[u64]) -> *mut DsmnCounts {
        let mut handle = ptr::null_mut();
        assert_eq!(dsmn_counts_new(counts.as_ptr(), counts.len(), &mut handle), DSMN_OK);
        handle
    }

    #[test]
    fn round_trip_closed_form() {
        unsafe {
            let h = make(&[2, 1, 1]);
            let mut pqr = DsmnPqr::default();
            assert_eq!(dsmn_pqr_cell_leq(h, 0, 0.5, &mut pqr), DSMN_OK);
            assert!((pqr.p - 0.3125).abs() < 1e-9);
            assert!((pqr.q - 0.3125).abs() < 1e-9);
            assert!((pqr.r - 0.375).abs() < 1e-9);
            dsmn_counts_free(h);
        }
    }

    #[test]
    fn mc_is_deterministic_in_seed() {
        unsafe {
            let h = make(&[2, 1, 1]);
            let mut a = DsmnPqr::default();
            let mut b = DsmnPqr::default();
            assert_eq!(dsmn_pqr_cell_leq_mc(h, 0, 0.5, 20_000, 5, &mut a), DSMN_OK);
            assert_eq!(dsmn_pqr_cell_leq_mc(h, 0, 0.5, 20_000, 5, &mut b), DSMN_OK);
            assert_eq!(a.p.to_bits(), b.p.to_bits());
            assert_eq!(a.q.to_bits(), b.q.to_bits());
            dsmn_counts_free(h);
        }
    }

    #[test]
    fn idm_matches_ddsm_through_the_abi() {
        unsafe {
            let h = make(&[25, 3, 4, 7]);
            let mut pqr = DsmnPqr::default();
            let mut bounds = DsmnBounds::default();
            assert_eq!(dsmn_pqr_cell_leq(h, 1, 0.2, &mut pqr), DSMN_OK);
            assert_eq!(dsmn_idm_cell_leq_bounds(h, 1, 0.2, 1.0, &mut bounds), DSMN_OK);
            assert!((bounds.lower - pqr.p).abs() < 1e-9);
            assert!((bounds.upper - (pqr.p + pqr.r)).abs() < 1e-9);
            dsmn_counts_free(h);
        }
    }

    #[test]
    fn error_codes_and_messages() {
        unsafe {
            let mut handle = ptr::null_mut();
            // usage: single category
            let code = dsmn_counts_new([3u64].as_ptr(), 1, &mut handle);
            assert_eq!(code, DSMN_ERR_USAGE);
            let msg = CStr::from_ptr(dsmn_last_error_message()).to_string_lossy();
            assert!(!msg.is_empty());

            // null pointers
            assert_eq!(dsmn_counts_new(ptr::null(), 0, &mut handle), DSMN_ERR_NULL);
            let mut pqr = DsmnPqr::default();
            assert_eq!(dsmn_pqr_cell_leq(ptr::null(), 0, 0.5, &mut pqr), DSMN_ERR_NULL);

            // usage through a valid handle: theta0 out of range
            let h = make(&[2, 1, 1]);
            assert_eq!(dsmn_pqr_cell_leq(h, 0, 1.5, &mut pqr), DSMN_ERR_USAGE);
            // cell out of range
            assert_eq!(dsmn_pqr_cell_leq(h, 7, 0.5, &mut pqr), DSMN_ERR_USAGE);
            dsmn_counts_free(h);
            dsmn_counts_free(ptr::null_mut()); // no-op
        }
    }

    #[test]
    fn linkage_rate_through_the_abi() {
        unsafe {
            let h = make(&[25, 3, 4, 7]);
            let mut rate = 0.0;
            let mut se = 0.0;
            assert_eq!(dsmn_linkage_acceptance_rate(h, 100_000, 3, &mut rate, &mut se), DSMN_OK);
            assert!((rate - 0.042).abs() < 0.01, "rate {rate}");
            assert!(se > 0.0);
            // wrong K
            let h3 = make(&[1, 2, 3]);
            assert_eq!(
                dsmn_linkage_acceptance_rate(h3, 100, 3, &mut rate, &mut se),
                DSMN_ERR_USAGE
            );
            dsmn_counts_free(h);
            dsmn_counts_free(h3);
        }
    }

    #[test]
    fn version_is_nul_terminated() {
        unsafe {
            let v = CStr::from_ptr(dsmn_version()).to_str().unwrap();
            assert_eq!(v, env!("CARGO_PKG_VERSION"));
        }
    }
}
