//! C ABI for `eqrel-ramsey`.
//!
//! Every entry point returns an [`ErStatus`]. Results come back through out
//! parameters; on failure those are left untouched and a message describing
//! the failure is available from [`er_last_error_message`] on the same thread.
//!
//! Handles are opaque and owned by the caller once returned. Release them with
//! the matching `*_free` function. Strings returned by the library are
//! NUL-terminated and must be released with [`er_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eqrel_ramsey::alternation::{sigma, validate_alternating, ConstraintSeq, Partition};
use eqrel_ramsey::cli::parse_relation;
use eqrel_ramsey::coding::CodingContext;
use eqrel_ramsey::eqrel::{depth, leq_fin, Depth, EqRelStream, FiniteEqRel};
use eqrel_ramsey::ordinal::{Bijection, Cnf};
use eqrel_ramsey::words::Word;
use eqrel_ramsey::Error;

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Validation = 5,
    NotEndExtension = 6,
    LetterOutsideAlphabet = 7,
    LimitExceeded = 8,
    Overflow = 9,
    Internal = 10,
    Panic = 11,
    BufferTooSmall = 12,
}

impl From<&Error> for ErStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse(_) => ErStatus::Parse,
            Error::InvalidInput(_) | Error::NotCanonical { .. } | Error::JoinNotBackward { .. } => {
                ErStatus::InvalidInput
            }
            Error::Validation(_) => ErStatus::Validation,
            Error::NotEndExtension(_) => ErStatus::NotEndExtension,
            Error::LetterOutsideAlphabet(_) => ErStatus::LetterOutsideAlphabet,
            Error::LimitExceeded(_) => ErStatus::LimitExceeded,
            Error::Overflow(_) => ErStatus::Overflow,
            Error::Invariant(_) => ErStatus::Internal,
        }
    }
}

/// A partition of ω together with a class constraint.
pub struct ErSpace {
    partition: Partition,
    constraint: ConstraintSeq,
}

/// A finite equivalence relation on an initial segment of ω.
pub struct ErFinite {
    inner: FiniteEqRel,
}

/// An equivalence relation on ω, evaluated lazily.
pub struct ErRelation {
    inner: EqRelStream,
}

/// A word coding context at a fixed level.
pub struct ErCoding {
    inner: CodingContext,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Fail(ErStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_last_error(e.to_string());
        Fail(ErStatus::from(&e))
    }
}

type FfiResult<T = ()> = std::result::Result<T, Fail>;

fn fail(status: ErStatus, msg: impl Into<String>) -> Fail {
    set_last_error(msg);
    Fail(status)
}

fn guard(body: impl FnOnce() -> FfiResult) -> ErStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ErStatus::Ok,
        Ok(Err(Fail(status))) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {msg}"));
            ErStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| fail(ErStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| fail(ErStatus::NullPointer, format!("{name} is null")))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(fail(ErStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ErStatus::Utf8, format!("{name} is not valid UTF-8")))
}

fn to_c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(ErStatus::Internal, "string contains an interior NUL"))
}

unsafe fn write_usizes(values: &[usize], buf: *mut usize, cap: usize, len_out: *mut usize) -> FfiResult {
    *out(len_out, "len_out")? = values.len();
    if values.len() > cap {
        return Err(fail(
            ErStatus::BufferTooSmall,
            format!("{} values do not fit in a buffer of {cap}", values.len()),
        ));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(fail(ErStatus::NullPointer, "buf is null"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// The message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn er_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn er_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes `σ(k)`, the block index under the dyadic partition.
///
/// # Safety
/// `out_value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn er_sigma(k: usize, out_value: *mut usize) -> ErStatus {
    guard(|| {
        *out(out_value, "out_value")? = sigma(k);
        Ok(())
    })
}

/// Builds a space from a partition spec (`mod:<l>` or `dyadic`), a
/// constraint (`all`, `geq` or `f-geq:<id>`) and the ordinal `beta` used by
/// `f-geq` constraints. `beta` may be null, meaning `w`.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out_space` must be valid.
#[no_mangle]
pub unsafe extern "C" fn er_space_new(
    partition: *const c_char,
    constraint: *const c_char,
    beta: *const c_char,
    out_space: *mut *mut ErSpace,
) -> ErStatus {
    guard(|| {
        let slot = out(out_space, "out_space")?;
        let partition: Partition = text(partition, "partition")?.parse()?;
        let beta_text = if beta.is_null() { "w" } else { text(beta, "beta")? };
        let beta: Cnf = beta_text.parse()?;
        let constraint = ConstraintSeq::parse_with(text(constraint, "constraint")?, |id| {
            Bijection::from_spec(id, beta)
        })?;
        *slot = boxed(ErSpace { partition, constraint });
        Ok(())
    })
}

/// # Safety
/// `space` must be null or a handle from [`er_space_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn er_space_free(space: *mut ErSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Parses a finite relation from its text form, such as `"0 1 0 3"`.
///
/// # Safety
/// `s` must be NUL-terminated; `out_rel` must be valid.
#[no_mangle]
pub unsafe extern "C" fn er_finite_parse(s: *const c_char, out_rel: *mut *mut ErFinite) -> ErStatus {
    guard(|| {
        let slot = out(out_rel, "out_rel")?;
        let inner: FiniteEqRel = text(s, "s")?.parse()?;
        *slot = boxed(ErFinite { inner });
        Ok(())
    })
}

/// Builds a finite relation from a canonical representative array.
///
/// # Safety
/// `assign` must point to `len` readable values (or be null when `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn er_finite_from_assign(
    assign: *const usize,
    len: usize,
    out_rel: *mut *mut ErFinite,
) -> ErStatus {
    guard(|| {
        let slot = out(out_rel, "out_rel")?;
        let values = if len == 0 {
            Vec::new()
        } else {
            if assign.is_null() {
                return Err(fail(ErStatus::NullPointer, "assign is null"));
            }
            std::slice::from_raw_parts(assign, len).to_vec()
        };
        *slot = boxed(ErFinite { inner: FiniteEqRel::from_assign(values)? });
        Ok(())
    })
}

/// # Safety
/// `rel` must be null or a live finite handle.
#[no_mangle]
pub unsafe extern "C" fn er_finite_free(rel: *mut ErFinite) {
    if !rel.is_null() {
        drop(Box::from_raw(rel));
    }
}

/// Writes the size of the domain and the number of classes.
///
/// # Safety
/// `rel` must be a live handle; out pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn er_finite_shape(
    rel: *const ErFinite,
    out_domain: *mut usize,
    out_classes: *mut usize,
) -> ErStatus {
    guard(|| {
        let r = &borrow(rel, "rel")?.inner;
        if let Some(d) = out_domain.as_mut() {
            *d = r.domain_size();
        }
        if let Some(c) = out_classes.as_mut() {
            *c = r.len();
        }
        Ok(())
    })
}

/// Copies the representative array into `buf`. `out_len` always receives the
/// required length; when it exceeds `cap` the call fails with
/// `BufferTooSmall` and nothing is copied.
///
/// # Safety
/// `buf` must have room for `cap` values; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn er_finite_assign(
    rel: *const ErFinite,
    buf: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> ErStatus {
    guard(|| write_usizes(borrow(rel, "rel")?.inner.assign(), buf, cap, out_len))
}

/// Text form of a finite relation.
///
/// # Safety
/// `rel` must be a live handle; `out_str` must be valid.
#[no_mangle]
pub unsafe extern "C" fn er_finite_to_string(rel: *const ErFinite, out_str: *mut *mut c_char) -> ErStatus {
    guard(|| {
        let slot = out(out_str, "out_str")?;
        *slot = to_c_string(borrow(rel, "rel")?.inner.to_string())?;
        Ok(())
    })
}

/// Writes whether `a` is an initial approximation of `b`.
///
/// # Safety
/// Both handles must be live; `out_result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn er_finite_leq(a: *const ErFinite, b: *const ErFinite, out_result: *mut bool) -> ErStatus {
    guard(|| {
        let (a, b) = (&borrow(a, "a")?.inner, &borrow(b, "b")?.inner);
        *out(out_result, "out_result")? = leq_fin(a, b);
        Ok(())
    })
}

/// Builds a relation on ω in `space` from a spec: `canonical`,
/// `random:<seed>[:<keep>]`, or a finite prefix such as `"0 1 0"` that is
/// continued by the canonical member.
///
/// # Safety
/// `space` must be live; `spec` NUL-terminated; `out_rel` valid.
#[no_mangle]
pub unsafe extern "C" fn er_relation_new(
    space: *const ErSpace,
    spec: *const c_char,
    out_rel: *mut *mut ErRelation,
) -> ErStatus {
    guard(|| {
        let slot = out(out_rel, "out_rel")?;
        let s = borrow(space, "space")?;
        let inner = parse_relation(text(spec, "spec")?, &s.partition, &s.constraint)?;
        *slot = boxed(ErRelation { inner });
        Ok(())
    })
}

/// The identity relation on ω.
///
/// # Safety
/// `out_rel` must be valid.
#[no_mangle]
pub unsafe extern "C" fn er_relation_identity(out_rel: *mut *mut ErRelation) -> ErStatus {
    guard(|| {
        *out(out_rel, "out_rel")? = boxed(ErRelation { inner: EqRelStream::identity() });
        Ok(())
    })
}

/// # Safety
/// `rel` must be null or a live relation handle.
#[no_mangle]
pub unsafe extern "C" fn er_relation_free(rel: *mut ErRelation) {
    if !rel.is_null() {
        drop(Box::from_raw(rel));
    }
}

/// Copies the first `count` class representatives into `buf`. Fewer are
/// written when the relation has fewer classes; `out_len` gets the number
/// written.
///
/// # Safety
/// `buf` must have room for `count` values; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn er_relation_reps(
    rel: *const ErRelation,
    count: usize,
    buf: *mut usize,
    out_len: *mut usize,
) -> ErStatus {
    guard(|| {
        let reps = borrow(rel, "rel")?.inner.reps(count);
        write_usizes(&reps, buf, count, out_len)
    })
}

/// The `n`-th approximation: the restriction to `p_n`, as a new finite
/// handle. Fails with `InvalidInput` when the relation has at most `n` classes.
///
/// # Safety
/// `rel` must be live; `out_approx` valid.
#[no_mangle]
pub unsafe extern "C" fn er_relation_approx(
    rel: *const ErRelation,
    n: usize,
    out_approx: *mut *mut ErFinite,
) -> ErStatus {
    guard(|| {
        let slot = out(out_approx, "out_approx")?;
        let inner = borrow(rel, "rel")?
            .inner
            .approx(n)
            .ok_or_else(|| fail(ErStatus::InvalidInput, format!("relation has no approximation at {n}")))?;
        *slot = boxed(ErFinite { inner });
        Ok(())
    })
}

/// Writes the depth of `a` in `b`, or -1 when `a` is not an approximation of `b`.
///
/// # Safety
/// Handles must be live; `out_depth` valid.
#[no_mangle]
pub unsafe extern "C" fn er_depth(a: *const ErFinite, b: *const ErRelation, out_depth: *mut i64) -> ErStatus {
    guard(|| {
        let d = depth(&borrow(a, "a")?.inner, &borrow(b, "b")?.inner);
        *out(out_depth, "out_depth")? = match d {
            Depth::Finite(k) => i64::try_from(k).map_err(|_| fail(ErStatus::Overflow, "depth exceeds i64"))?,
            Depth::Infinite => -1,
        };
        Ok(())
    })
}

/// Checks the first `depth` representatives against the alternation pattern
/// of `space`. Returns `Validation` with a message on failure.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn er_validate_alternating(
    rel: *const ErRelation,
    space: *const ErSpace,
    depth: usize,
) -> ErStatus {
    guard(|| {
        let (r, s) = (borrow(rel, "rel")?, borrow(space, "space")?);
        validate_alternating(&r.inner, &s.partition, depth)
            .map_err(|v| fail(ErStatus::Validation, v.to_string()))
    })
}

/// A coding context for end-extensions of the `n`-th approximation of `rel`.
///
/// # Safety
/// Handles must be live; `out_ctx` valid.
#[no_mangle]
pub unsafe extern "C" fn er_coding_new(
    space: *const ErSpace,
    rel: *const ErRelation,
    n: usize,
    out_ctx: *mut *mut ErCoding,
) -> ErStatus {
    guard(|| {
        let slot = out(out_ctx, "out_ctx")?;
        let (s, r) = (borrow(space, "space")?, borrow(rel, "rel")?);
        let inner = CodingContext::new(r.inner.clone(), s.partition.clone(), s.constraint.clone(), n)?;
        *slot = boxed(ErCoding { inner });
        Ok(())
    })
}

/// # Safety
/// `ctx` must be null or a live coding handle.
#[no_mangle]
pub unsafe extern "C" fn er_coding_free(ctx: *mut ErCoding) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Encodes an end-extension as a word in text form.
///
/// # Safety
/// Handles must be live; `out_word` valid.
#[no_mangle]
pub unsafe extern "C" fn er_coding_encode(
    ctx: *const ErCoding,
    extension: *const ErFinite,
    out_word: *mut *mut c_char,
) -> ErStatus {
    guard(|| {
        let slot = out(out_word, "out_word")?;
        let w = borrow(ctx, "ctx")?.inner.encode_extension(&borrow(extension, "extension")?.inner)?;
        *slot = to_c_string(w.to_string())?;
        Ok(())
    })
}

/// Decodes a word, given in text form, into the end-extension it codes.
///
/// # Safety
/// `ctx` must be live; `word` NUL-terminated; `out_rel` valid.
#[no_mangle]
pub unsafe extern "C" fn er_coding_decode(
    ctx: *const ErCoding,
    word: *const c_char,
    out_rel: *mut *mut ErFinite,
) -> ErStatus {
    guard(|| {
        let slot = out(out_rel, "out_rel")?;
        let w: Word = text(word, "word")?.parse()?;
        let inner = borrow(ctx, "ctx")?.inner.decode_word(&w)?;
        *slot = boxed(ErFinite { inner });
        Ok(())
    })
}

/// Divides an ordinal in Cantor normal form (for example `w^2*3+w`) by ω on
/// the left, returning the quotient in the same text form. Fails with
/// `InvalidInput` unless the ordinal is a limit at least `w^2`.
///
/// # Safety
/// `ordinal` must be NUL-terminated; `out_str` valid.
#[no_mangle]
pub unsafe extern "C" fn er_divide_by_omega(ordinal: *const c_char, out_str: *mut *mut c_char) -> ErStatus {
    guard(|| {
        let slot = out(out_str, "out_str")?;
        let a: Cnf = text(ordinal, "ordinal")?.parse()?;
        *slot = to_c_string(a.divide_by_omega()?.to_string())?;
        Ok(())
    })
}
