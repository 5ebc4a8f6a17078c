use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use laplace_pin::Error;

/// Result code of every fallible call; details via `lp_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the mathematical domain.
    Domain = 2,
    /// Exact enumeration beyond its size guard.
    Capacity = 3,
    NotPositiveDefinite = 4,
    NoSignChange = 5,
    /// Output buffer shorter than the result; the required length is still reported.
    BufferTooSmall = 6,
    Io = 7,
    Parse = 8,
    /// Rust panic caught at the boundary.
    Internal = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

pub(crate) fn set_last_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

/// Failure carried to the boundary before it becomes a status code.
pub(crate) struct Failure {
    status: LpStatus,
    message: String,
}

impl Failure {
    pub(crate) fn new(status: LpStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    pub(crate) fn null(what: &str) -> Self {
        Failure::new(LpStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => LpStatus::Domain,
            Error::Capacity(_) => LpStatus::Capacity,
            Error::NotPositiveDefinite { .. } => LpStatus::NotPositiveDefinite,
            Error::NoSignChange(_) => LpStatus::NoSignChange,
            Error::Io(_) => LpStatus::Io,
            Error::Json(_) | Error::Parse(_) => LpStatus::Parse,
        };
        Failure::new(status, e.to_string())
    }
}

/// Runs `body`, recording the message of any failure or panic for the calling thread.
pub(crate) fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            LpStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(f.message);
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            LpStatus::Internal
        }
    }
}

/// Copies the last error message of this thread into `buf` as a NUL-terminated string.
///
/// Returns the message length in bytes, excluding the terminator; the copy is
/// truncated when `len` is not larger than that. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn lp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: caller guarantees `len` writable bytes at `buf`, and n < len
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Static name of a status code, e.g. `"capacity"`.
#[no_mangle]
pub extern "C" fn lp_status_name(status: LpStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        LpStatus::Ok => b"ok\0",
        LpStatus::NullPointer => b"null-pointer\0",
        LpStatus::Domain => b"domain\0",
        LpStatus::Capacity => b"capacity\0",
        LpStatus::NotPositiveDefinite => b"not-positive-definite\0",
        LpStatus::NoSignChange => b"no-sign-change\0",
        LpStatus::BufferTooSmall => b"buffer-too-small\0",
        LpStatus::Io => b"io\0",
        LpStatus::Parse => b"parse\0",
        LpStatus::Internal => b"internal\0",
    };
    s.as_ptr().cast()
}
