//! C ABI for `laplace-pin`.
//!
//! Every fallible function returns an [`LpStatus`] and writes results through
//! out-pointers; on failure only the documented length outputs are written and
//! [`lp_last_error_message`] describes the cause. Objects with state are
//! opaque handles created by `*_new` and released by the matching `*_free`.
//! Handles are not thread-safe; distinct handles may be used concurrently.

mod status;

use std::ffi::c_char;

use laplace_pin::free_energy::RatioPolynomial;
use laplace_pin::model::{log_det_closed_form, log_partition_zero, BoundaryData, PinningSet};
use laplace_pin::sampler::{run_chain, ChainRun, InitialState, SamplerConfig, SweepOrder};
use laplace_pin::variational::{classify_free, critical_lengths, MinimiserKind};

pub use status::{lp_last_error_message, lp_status_name, LpStatus};
use status::{guard, Failure};

/// NUL-terminated version of this library.
#[no_mangle]
pub extern "C" fn lp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    // SAFETY: non-null, and the caller guarantees it points to writable storage for `T`
    unsafe { out.write(value) };
    Ok(())
}

/// `log det Q_N` of the unpinned zero-boundary precision matrix, in closed form.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_log_det_closed_form(n: usize, out: *mut f64) -> LpStatus {
    guard(|| write(out, log_det_closed_form(n)?, "out"))
}

/// `log Z_N(P)` with zero boundary data; `pins` lists `n_pins` sites in `1..=n-1`.
///
/// # Safety
/// `pins` must be null (only with `n_pins == 0`) or valid for `n_pins` reads; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_log_partition_zero(n: usize, pins: *const usize, n_pins: usize, out: *mut f64) -> LpStatus {
    guard(|| {
        let sites: &[usize] = match (pins.is_null(), n_pins) {
            (_, 0) => &[],
            (true, _) => return Err(Failure::null("pins")),
            // SAFETY: non-null with `n_pins` readable elements by contract
            (false, k) => unsafe { std::slice::from_raw_parts(pins, k) },
        };
        write(out, log_partition_zero(n, &PinningSet::new(sites.iter().copied()))?, "out")
    })
}

/// Critical lengths of a segment with data `(a, α)` at reward `tau`, in increasing order.
///
/// Writes up to two lengths and their branch indices (1 or 2) to `values[0..]`
/// and `branches[0..]`, and their number to `count`. Infeasible lengths (above 1)
/// are included.
///
/// # Safety
/// `values` and `branches` must be valid for two writes each, `count` for one.
#[no_mangle]
pub unsafe extern "C" fn lp_critical_lengths(
    tau: f64,
    a: f64,
    alpha: f64,
    values: *mut f64,
    branches: *mut u8,
    count: *mut usize,
) -> LpStatus {
    guard(|| {
        if values.is_null() || branches.is_null() {
            return Err(Failure::null("values or branches"));
        }
        let mut lengths = critical_lengths(tau, a, alpha)?;
        lengths.sort_by(|x, y| x.value.total_cmp(&y.value));
        lengths.truncate(2);
        write(count, lengths.len(), "count")?;
        for (i, c) in lengths.iter().enumerate() {
            // SAFETY: i < 2 and both arrays hold two elements by contract
            unsafe {
                values.add(i).write(c.value);
                branches.add(i).write(c.branch.index());
            }
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpMinimiserKind {
    /// Unconstrained bi-harmonic cubic through the boundary data.
    BiHarmonic = 0,
    /// Affine profile for a free right end.
    Linear = 1,
    /// Cubic on `[0, l]`, zero beyond.
    Left = 2,
    /// Cubics on `[0, l]` and `[1 - r, 1]`, zero between.
    Both = 3,
}

/// One minimiser of the rate function; `l` and `r` are zero when not used.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpMinimiser {
    pub kind: LpMinimiserKind,
    pub l: f64,
    pub r: f64,
    /// Bending energy `∫ h''²/2`.
    pub energy: f64,
}

/// Minimisers of the free-end rate function at reward `tau`.
///
/// Writes `Σ_min` to `sigma_min` and the number of minimisers to `count`; the
/// first `min(count, capacity)` minimisers go to `out`. Returns
/// `BUFFER_TOO_SMALL` when `capacity < count`, after filling `out`.
///
/// # Safety
/// `out` must be valid for `capacity` writes (may be null when `capacity == 0`);
/// `sigma_min` and `count` must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn lp_classify_free(
    a: f64,
    alpha: f64,
    tau: f64,
    sigma_min: *mut f64,
    out: *mut LpMinimiser,
    capacity: usize,
    count: *mut usize,
) -> LpStatus {
    guard(|| {
        let report = classify_free(a, alpha, tau)?;
        write(sigma_min, report.sigma_min, "sigma_min")?;
        write(count, report.minimisers.len(), "count")?;
        if capacity > 0 && out.is_null() {
            return Err(Failure::null("out"));
        }
        for (i, d) in report.minimisers.iter().take(capacity).enumerate() {
            let (kind, l, r) = match d.kind {
                MinimiserKind::BiHarmonic => (LpMinimiserKind::BiHarmonic, 0.0, 0.0),
                MinimiserKind::Linear => (LpMinimiserKind::Linear, 0.0, 0.0),
                MinimiserKind::HLeft { l } => (LpMinimiserKind::Left, l, 0.0),
                MinimiserKind::HBoth { l, r } => (LpMinimiserKind::Both, l, r),
            };
            // SAFETY: i < capacity
            unsafe { out.add(i).write(LpMinimiser { kind, l, r, energy: d.energy }) };
        }
        if capacity < report.minimisers.len() {
            return Err(Failure::new(
                LpStatus::BufferTooSmall,
                format!("{} minimisers, capacity {capacity}", report.minimisers.len()),
            ));
        }
        Ok(())
    })
}

/// Partition-function ratio `Z_{N,ε}/Z_N` as a polynomial in `ε`, by enumeration.
pub struct LpRatio {
    poly: RatioPolynomial,
}

/// Enumerates the pinning sets of size `n` (at most 22) into a new handle.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_ratio_new(n: usize, out: *mut *mut LpRatio) -> LpStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let poly = RatioPolynomial::enumerate(n)?;
        write(out, Box::into_raw(Box::new(LpRatio { poly })), "out")
    })
}

fn ratio_ref<'a>(handle: *const LpRatio) -> Result<&'a LpRatio, Failure> {
    // SAFETY: non-null handles come from `lp_ratio_new` and are live until `lp_ratio_free`
    unsafe { handle.as_ref() }.ok_or_else(|| Failure::null("ratio handle"))
}

fn check_epsilon(epsilon: f64) -> Result<(), Failure> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Failure::new(LpStatus::Domain, format!("ε must be finite and ≥ 0, got {epsilon}")))
    }
}

/// `log(Z_{N,ε}/Z_N)`; zero at `ε = 0`.
///
/// # Safety
/// `handle` must come from `lp_ratio_new`; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_ratio_log(handle: *const LpRatio, epsilon: f64, out: *mut f64) -> LpStatus {
    guard(|| {
        let r = ratio_ref(handle)?;
        check_epsilon(epsilon)?;
        let v = if epsilon == 0.0 { 0.0 } else { r.poly.log_ratio(epsilon) };
        write(out, v, "out")
    })
}

/// Expected pin density `E|P|/N` under the pinned measure.
///
/// # Safety
/// `handle` must come from `lp_ratio_new`; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_ratio_pin_density(handle: *const LpRatio, epsilon: f64, out: *mut f64) -> LpStatus {
    guard(|| {
        let r = ratio_ref(handle)?;
        check_epsilon(epsilon)?;
        let v = if epsilon == 0.0 { 0.0 } else { r.poly.pin_density(epsilon) };
        write(out, v, "out")
    })
}

/// Releases a ratio handle; null is ignored.
///
/// # Safety
/// `handle` must be null or come from `lp_ratio_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lp_ratio_free(handle: *mut LpRatio) {
    if !handle.is_null() {
        // SAFETY: created by Box::into_raw in lp_ratio_new, released once
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Heat-bath chain settings. Right data `(b, beta)` is ignored when `free_right` is set.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpChainConfig {
    pub n: usize,
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub free_right: bool,
    pub epsilon: f64,
    pub seed: u64,
    /// Stream index; chains sharing a seed with distinct replicas are independent.
    pub replica: u64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Uniformly random site order instead of alternating sweep directions.
    pub random_scan: bool,
    /// Start with every free site pinned instead of at the discrete minimiser.
    pub pinned_start: bool,
}

/// Defaults: zero Dirichlet data, 1000 sweeps, 100 burn-in, no thinning.
#[no_mangle]
pub extern "C" fn lp_chain_config_default(n: usize, epsilon: f64, seed: u64) -> LpChainConfig {
    let d = SamplerConfig::new(n, BoundaryData::zero(), epsilon, seed);
    LpChainConfig {
        n,
        a: 0.0,
        alpha: 0.0,
        b: 0.0,
        beta: 0.0,
        free_right: false,
        epsilon,
        seed,
        replica: 0,
        sweeps: d.sweeps,
        burn_in: d.burn_in,
        thin: d.thin,
        random_scan: false,
        pinned_start: false,
    }
}

impl LpChainConfig {
    fn to_sampler(self) -> SamplerConfig {
        let bc = if self.free_right {
            BoundaryData::free_right(self.a, self.alpha)
        } else {
            BoundaryData::dirichlet(self.a, self.alpha, self.b, self.beta)
        };
        let mut c = SamplerConfig::new(self.n, bc, self.epsilon, self.seed);
        c.replica = self.replica;
        c.sweeps = self.sweeps;
        c.burn_in = self.burn_in;
        c.thin = self.thin;
        c.order = if self.random_scan { SweepOrder::RandomScan } else { SweepOrder::ForwardBackward };
        c.init = if self.pinned_start { InitialState::Pinned } else { InitialState::Minimiser };
        c
    }
}

/// Summary of one emitted chain state.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LpSample {
    /// Sweeps completed, including burn-in.
    pub sweep: usize,
    /// `#{k ∈ 1..N : φ_k = 0} / N`.
    pub contact_fraction: f64,
    /// `|P| / N`.
    pub pin_fraction: f64,
    /// `max_k |φ_k| / N²`.
    pub sup_abs_h: f64,
}

/// Deterministic heat-bath chain; the seed and replica fix the random stream.
pub struct LpChain {
    run: ChainRun,
}

/// Validates `config` and starts a chain.
///
/// # Safety
/// `config` must be valid for one read, `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_chain_new(config: *const LpChainConfig, out: *mut *mut LpChain) -> LpStatus {
    guard(|| {
        // SAFETY: valid for one read by contract when non-null
        let config = unsafe { config.as_ref() }.ok_or_else(|| Failure::null("config"))?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let run = run_chain(&config.to_sampler())?;
        write(out, Box::into_raw(Box::new(LpChain { run })), "out")
    })
}

fn chain_mut<'a>(handle: *mut LpChain) -> Result<&'a mut LpChain, Failure> {
    // SAFETY: non-null handles come from `lp_chain_new` and are live until `lp_chain_free`
    unsafe { handle.as_mut() }.ok_or_else(|| Failure::null("chain handle"))
}

/// Advances to the next emitted state. Sets `has_sample` to false once the
/// configured sweeps are exhausted, leaving `sample` untouched.
///
/// # Safety
/// `handle` must come from `lp_chain_new`; `sample` and `has_sample` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_chain_next(handle: *mut LpChain, sample: *mut LpSample, has_sample: *mut bool) -> LpStatus {
    guard(|| {
        let chain = chain_mut(handle)?;
        if sample.is_null() {
            return Err(Failure::null("sample"));
        }
        match chain.run.next() {
            Some(s) => {
                write(
                    sample,
                    LpSample {
                        sweep: s.sweep,
                        contact_fraction: s.contact_fraction,
                        pin_fraction: s.pin_fraction,
                        sup_abs_h: s.profile.sup_abs(),
                    },
                    "sample",
                )?;
                write(has_sample, true, "has_sample")
            }
            None => write(has_sample, false, "has_sample"),
        }
    })
}

/// Copies the current heights `φ_{-1}, φ_0, …, φ_{N+1}` (`N + 3` values) into `buf`.
///
/// Writes the required length to `len_out`; returns `BUFFER_TOO_SMALL` without
/// copying when `len` is shorter.
///
/// # Safety
/// `handle` must come from `lp_chain_new`; `buf` must be valid for `len` writes,
/// `len_out` for one write.
#[no_mangle]
pub unsafe extern "C" fn lp_chain_field(handle: *mut LpChain, buf: *mut f64, len: usize, len_out: *mut usize) -> LpStatus {
    guard(|| {
        let chain = chain_mut(handle)?;
        let values = chain.run.state().field.values();
        write(len_out, values.len(), "len_out")?;
        if len < values.len() {
            return Err(Failure::new(
                LpStatus::BufferTooSmall,
                format!("field needs {} values, buffer holds {len}", values.len()),
            ));
        }
        if buf.is_null() {
            return Err(Failure::null("buf"));
        }
        // SAFETY: buf holds at least values.len() elements
        unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
        Ok(())
    })
}

/// Releases a chain handle; null is ignored.
///
/// # Safety
/// `handle` must be null or come from `lp_chain_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lp_chain_free(handle: *mut LpChain) {
    if !handle.is_null() {
        // SAFETY: created by Box::into_raw in lp_chain_new, released once
        drop(unsafe { Box::from_raw(handle) });
    }
}
