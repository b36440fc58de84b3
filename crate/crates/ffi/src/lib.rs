//! C ABI for the `losmimo` library.
//!
//! Every fallible function returns a [`LosmimoStatus`]; on failure the message is kept
//! per thread and can be read with [`losmimo_last_error_message`]. Objects are opaque
//! handles created by `*_new` functions and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use losmimo::experiments::{render_csv, run_scenario, ScenarioConfig};
use losmimo::{
    h_los_combined, inv_kappa, medium_optimal_spacing, optimize_l_delta, path_matrix, solve_thickness, ArrayConfig,
    ChannelMatrix, ConditioningReport, Error, LDeltaOptions, LinkEvaluator, MediumSpec, PathModel, ShapeKind,
};

pub const LOSMIMO_PATH_APPROXIMATE: u32 = 0;
pub const LOSMIMO_PATH_EXACT: u32 = 1;

pub const LOSMIMO_SHAPE_LINEAR: u32 = 0;
pub const LOSMIMO_SHAPE_QUADRATIC: u32 = 1;
pub const LOSMIMO_SHAPE_EXPONENTIAL: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LosmimoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    Infeasible = 5,
    IoError = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Link geometry plus the distance model used to build channels.
pub struct LosmimoLink {
    config: ArrayConfig,
    model: PathModel,
}

/// Channel matrix built from a link and a medium.
pub struct LosmimoChannel {
    channel: ChannelMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(LosmimoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Infeasible(_) => LosmimoStatus::Infeasible,
            Error::Io(_) | Error::Csv(_) => LosmimoStatus::IoError,
            Error::Config(_) => LosmimoStatus::ConfigError,
            e if e.is_numerical() => LosmimoStatus::NumericalError,
            _ => LosmimoStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LosmimoStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LosmimoStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LosmimoStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(Failure(LosmimoStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            LosmimoStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn link_ref<'a>(p: *const LosmimoLink) -> Result<&'a LosmimoLink, Failure> {
    p.as_ref().ok_or_else(|| null("link"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `text` plus a NUL into `buf`. `required` always receives the needed size.
unsafe fn write_c_string(text: &str, buf: *mut c_char, len: usize, required: *mut usize) -> Result<(), Failure> {
    let need = text.len() + 1;
    if !required.is_null() {
        *required = need;
    }
    if buf.is_null() || len < need {
        return Err(Failure(
            LosmimoStatus::BufferTooSmall,
            format!("buffer of {len} bytes, need {need}"),
        ));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

fn path_model(code: u32) -> Result<PathModel, Failure> {
    match code {
        LOSMIMO_PATH_APPROXIMATE => Ok(PathModel::Approximate),
        LOSMIMO_PATH_EXACT => Ok(PathModel::Exact),
        _ => Err(invalid(format!("unknown path model {code}"))),
    }
}

fn shape(code: u32) -> Result<ShapeKind, Failure> {
    match code {
        LOSMIMO_SHAPE_LINEAR => Ok(ShapeKind::Linear),
        LOSMIMO_SHAPE_QUADRATIC => Ok(ShapeKind::Quadratic),
        LOSMIMO_SHAPE_EXPONENTIAL => Ok(ShapeKind::Exponential),
        _ => Err(invalid(format!("unknown shape {code}"))),
    }
}

unsafe fn write_report(
    rep: &ConditioningReport,
    inv_kappa_out: *mut f64,
    floor_limited_out: *mut bool,
) -> Result<(), Failure> {
    *out_ref(inv_kappa_out, "inv_kappa_out")? = rep.inv_kappa;
    if let Some(f) = floor_limited_out.as_mut() {
        *f = rep.numerically_floor_limited;
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn losmimo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated).
/// `required` (optional) receives the buffer size needed.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null; `required` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn losmimo_last_error_message(buf: *mut c_char, len: usize, required: *mut usize) -> LosmimoStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    // Not routed through `guard`, which would clear the message being read.
    match write_c_string(&msg, buf, len, required) {
        Ok(()) => LosmimoStatus::Ok,
        Err(Failure(s, _)) => s,
    }
}

/// Creates a link with `n_tx` transmit and `m_rx` receive antennas at the free-space
/// optimal spacing, untilted, using the approximate distance model.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_new(
    n_tx: usize,
    m_rx: usize,
    range: f64,
    lambda0: f64,
    out: *mut *mut LosmimoLink,
) -> LosmimoStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let config = ArrayConfig::new(n_tx, m_rx, range, lambda0);
        config.validate()?;
        *out = Box::into_raw(Box::new(LosmimoLink {
            config,
            model: PathModel::Approximate,
        }));
        Ok(())
    })
}

/// # Safety
/// `link` must come from [`losmimo_link_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_free(link: *mut LosmimoLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

unsafe fn update_link(link: *mut LosmimoLink, f: impl FnOnce(ArrayConfig) -> ArrayConfig) -> LosmimoStatus {
    guard(|| {
        let link = out_ref(link, "link")?;
        let next = f(link.config);
        next.validate()?;
        link.config = next;
        Ok(())
    })
}

/// Sets `d_t = d_r = eta * d_opt`.
///
/// # Safety
/// `link` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_set_eta(link: *mut LosmimoLink, eta: f64) -> LosmimoStatus {
    if !(eta.is_finite() && eta > 0.0) {
        return guard(|| Err(invalid(format!("eta must be positive, got {eta}"))));
    }
    update_link(link, |c| c.with_eta(eta))
}

/// Sets explicit antenna spacings in meters.
///
/// # Safety
/// `link` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_set_spacings(link: *mut LosmimoLink, d_t: f64, d_r: f64) -> LosmimoStatus {
    update_link(link, |c| c.with_spacings(d_t, d_r))
}

/// Sets the array tilts in radians. Spacings are kept.
///
/// # Safety
/// `link` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_set_tilts(link: *mut LosmimoLink, theta_t: f64, theta_r: f64) -> LosmimoStatus {
    update_link(link, |c| c.with_tilts(theta_t, theta_r))
}

/// Selects `LOSMIMO_PATH_APPROXIMATE` or `LOSMIMO_PATH_EXACT`.
///
/// # Safety
/// `link` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_set_path_model(link: *mut LosmimoLink, model: u32) -> LosmimoStatus {
    guard(|| {
        let link = out_ref(link, "link")?;
        link.model = path_model(model)?;
        Ok(())
    })
}

/// Current spacings in meters.
///
/// # Safety
/// `link` must be a valid handle; outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_spacings(link: *const LosmimoLink, d_t: *mut f64, d_r: *mut f64) -> LosmimoStatus {
    guard(|| {
        let link = link_ref(link)?;
        *out_ref(d_t, "d_t")? = link.config.d_t;
        *out_ref(d_r, "d_r")? = link.config.d_r;
        Ok(())
    })
}

fn evaluate(link: &LosmimoLink, medium: &MediumSpec) -> Result<ConditioningReport, Failure> {
    Ok(LinkEvaluator::new(&link.config, link.model)?.evaluate_medium(medium)?)
}

/// `1/kappa` without a medium. `floor_limited` is optional.
///
/// # Safety
/// `link` must be a valid handle; `inv_kappa` must be valid; `floor_limited` valid or null.
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_inv_kappa_free_space(
    link: *const LosmimoLink,
    inv_kappa: *mut f64,
    floor_limited: *mut bool,
) -> LosmimoStatus {
    guard(|| write_report(&evaluate(link_ref(link)?, &MediumSpec::free_space())?, inv_kappa, floor_limited))
}

/// `1/kappa` with a rectangular slab of the given thickness (meters).
///
/// # Safety
/// As for [`losmimo_link_inv_kappa_free_space`].
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_inv_kappa_rectangular(
    link: *const LosmimoLink,
    thickness: f64,
    sqrt_eps_r: f64,
    inv_kappa: *mut f64,
    floor_limited: *mut bool,
) -> LosmimoStatus {
    guard(|| {
        let rep = evaluate(link_ref(link)?, &MediumSpec::rectangular(thickness, sqrt_eps_r))?;
        write_report(&rep, inv_kappa, floor_limited)
    })
}

/// `1/kappa` with a Toeplitz medium given by its first row (meters, `len = max(M, N)`).
///
/// # Safety
/// `first_row` must point to `len` doubles; other pointers as for
/// [`losmimo_link_inv_kappa_free_space`].
#[no_mangle]
pub unsafe extern "C" fn losmimo_link_inv_kappa_toeplitz(
    link: *const LosmimoLink,
    first_row: *const f64,
    len: usize,
    sqrt_eps_r: f64,
    inv_kappa: *mut f64,
    floor_limited: *mut bool,
) -> LosmimoStatus {
    guard(|| {
        let row = slice(first_row, len, "first_row")?.to_vec();
        let rep = evaluate(link_ref(link)?, &MediumSpec::toeplitz(row, sqrt_eps_r))?;
        write_report(&rep, inv_kappa, floor_limited)
    })
}

/// Builds the combined channel for a Toeplitz medium (use an all-zero row for free space).
///
/// # Safety
/// `first_row` must point to `len` doubles; `out` must be valid and receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn losmimo_channel_new_toeplitz(
    link: *const LosmimoLink,
    first_row: *const f64,
    len: usize,
    sqrt_eps_r: f64,
    out: *mut *mut LosmimoChannel,
) -> LosmimoStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let link = link_ref(link)?;
        let medium = MediumSpec::toeplitz(slice(first_row, len, "first_row")?.to_vec(), sqrt_eps_r);
        medium.validate(&link.config)?;
        let paths = path_matrix(&link.config, link.model)?;
        let lengths = medium.lengths(&link.config, &paths)?;
        let channel = h_los_combined(&paths, &lengths, link.config.lambda0, sqrt_eps_r)?;
        *out = Box::into_raw(Box::new(LosmimoChannel { channel }));
        Ok(())
    })
}

/// # Safety
/// `channel` must come from a `losmimo_channel_new_*` function. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn losmimo_channel_free(channel: *mut LosmimoChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Matrix shape: `m_rx` rows by `n_tx` columns.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn losmimo_channel_shape(
    channel: *const LosmimoChannel,
    m_rx: *mut usize,
    n_tx: *mut usize,
) -> LosmimoStatus {
    guard(|| {
        let ch = channel.as_ref().ok_or_else(|| null("channel"))?;
        *out_ref(m_rx, "m_rx")? = ch.channel.m_rx();
        *out_ref(n_tx, "n_tx")? = ch.channel.n_tx();
        Ok(())
    })
}

/// Copies the entries row-major into `re` and `im`, each of length `m_rx * n_tx`.
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn losmimo_channel_entries(
    channel: *const LosmimoChannel,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> LosmimoStatus {
    guard(|| {
        let ch = channel.as_ref().ok_or_else(|| null("channel"))?;
        let entries = ch.channel.entries().as_slice();
        if len < entries.len() {
            return Err(Failure(
                LosmimoStatus::BufferTooSmall,
                format!("need {} entries, got {len}", entries.len()),
            ));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        for (i, z) in entries.iter().enumerate() {
            *re.add(i) = z.re;
            *im.add(i) = z.im;
        }
        Ok(())
    })
}

/// Gram eigenvalues (ascending, `min(M, N)` of them) and `1/kappa` of the channel.
/// `inv_kappa_out` is optional.
///
/// # Safety
/// `eigenvalues` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn losmimo_channel_eigenvalues(
    channel: *const LosmimoChannel,
    eigenvalues: *mut f64,
    len: usize,
    inv_kappa_out: *mut f64,
) -> LosmimoStatus {
    guard(|| {
        let ch = channel.as_ref().ok_or_else(|| null("channel"))?;
        let rep = inv_kappa(&ch.channel)?;
        if len < rep.eigenvalues.len() {
            return Err(Failure(
                LosmimoStatus::BufferTooSmall,
                format!("need {} eigenvalues, got {len}", rep.eigenvalues.len()),
            ));
        }
        if eigenvalues.is_null() {
            return Err(null("eigenvalues"));
        }
        ptr::copy_nonoverlapping(rep.eigenvalues.as_ptr(), eigenvalues, rep.eigenvalues.len());
        if let Some(k) = inv_kappa_out.as_mut() {
            *k = rep.inv_kappa;
        }
        Ok(())
    })
}

/// Spacing product `d_t d_r` (m^2) that orthogonalizes a `v`-antenna link behind a slab
/// of thickness `thickness`. Use `thickness = 0`, `sqrt_eps_r = 1` for free space.
///
/// # Safety
/// `d_product` must be valid.
#[no_mangle]
pub unsafe extern "C" fn losmimo_design_spacing(
    v: usize,
    range: f64,
    lambda0: f64,
    theta_t: f64,
    theta_r: f64,
    thickness: f64,
    sqrt_eps_r: f64,
    d_product: *mut f64,
) -> LosmimoStatus {
    guard(|| {
        let tpl = ArrayConfig::square(v, range, lambda0).with_tilts(theta_t, theta_r);
        *out_ref(d_product, "d_product")? = medium_optimal_spacing(&tpl, thickness, sqrt_eps_r)?.d_product;
        Ok(())
    })
}

/// Slab thickness (meters) that makes `d_product` the orthogonal spacing.
///
/// # Safety
/// `thickness` must be valid.
#[no_mangle]
pub unsafe extern "C" fn losmimo_design_thickness(
    v: usize,
    range: f64,
    lambda0: f64,
    theta_t: f64,
    theta_r: f64,
    d_product: f64,
    sqrt_eps_r: f64,
    thickness: *mut f64,
) -> LosmimoStatus {
    guard(|| {
        let tpl = ArrayConfig::square(v, range, lambda0).with_tilts(theta_t, theta_r);
        *out_ref(thickness, "thickness")? = solve_thickness(&tpl, d_product, sqrt_eps_r)?;
        Ok(())
    })
}

/// `|sin(m x / 2) / sin(x / 2)|`.
#[no_mangle]
pub extern "C" fn losmimo_closed_form_inner_product(m: usize, x: f64) -> f64 {
    losmimo::closed_form_inner_product_magnitude(m, x)
}

/// Best scale `l_delta` (meters) for a shape-function medium under the span bound `c`.
/// `grid_points = 0` selects the default grid.
///
/// # Safety
/// `link` must be valid; outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn losmimo_optimize_l_delta(
    link: *const LosmimoLink,
    shape_kind: u32,
    sqrt_eps_r: f64,
    c: f64,
    grid_points: usize,
    l_delta: *mut f64,
    inv_kappa_out: *mut f64,
) -> LosmimoStatus {
    guard(|| {
        let link = link_ref(link)?;
        let mut opts = LDeltaOptions::default();
        if grid_points > 0 {
            opts.grid_points = grid_points;
        }
        let opt = optimize_l_delta(&link.config, link.model, shape(shape_kind)?, sqrt_eps_r, c, opts)?;
        *out_ref(l_delta, "l_delta")? = opt.param("l_delta").unwrap_or(0.0);
        *out_ref(inv_kappa_out, "inv_kappa")? = opt.best_inv_kappa;
        Ok(())
    })
}

/// Parses a scenario file, runs it and renders the CSV (without the timestamp line)
/// into `buf`. `required` (optional) receives the size needed including the NUL.
///
/// # Safety
/// `config_text` must be a NUL-terminated UTF-8 string; `buf` valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn losmimo_run_scenario_csv(
    config_text: *const c_char,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> LosmimoStatus {
    guard(|| {
        if config_text.is_null() {
            return Err(null("config_text"));
        }
        let text = CStr::from_ptr(config_text)
            .to_str()
            .map_err(|_| Failure(LosmimoStatus::ConfigError, "config text is not UTF-8".into()))?;
        let cfg = ScenarioConfig::parse(text).map_err(Error::from)?;
        let table = run_scenario(&cfg)?;
        let bytes = render_csv(&table, &cfg, None)?;
        let csv = String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))?;
        write_c_string(&csv, buf, len, required)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_set_and_clear_message() {
        let mut link = ptr::null_mut();
        let s = unsafe { losmimo_link_new(0, 2, 10.0, 5e-3, &mut link) };
        assert_eq!(s, LosmimoStatus::InvalidArgument);
        let mut need = 0;
        assert_eq!(
            unsafe { losmimo_last_error_message(ptr::null_mut(), 0, &mut need) },
            LosmimoStatus::BufferTooSmall
        );
        assert!(need > 1);
        let s = unsafe { losmimo_link_new(2, 2, 10.0, 5e-3, &mut link) };
        assert_eq!(s, LosmimoStatus::Ok);
        unsafe { losmimo_last_error_message(ptr::null_mut(), 0, &mut need) };
        assert_eq!(need, 1);
        unsafe { losmimo_link_free(link) };
    }

    #[test]
    fn status_mapping() {
        assert_eq!(Failure::from(Error::NoConvergence { sweeps: 1 }).0, LosmimoStatus::NumericalError);
        assert_eq!(Failure::from(Error::Infeasible("x".into())).0, LosmimoStatus::Infeasible);
        assert_eq!(
            Failure::from(Error::Config(losmimo::ConfigError::new("x"))).0,
            LosmimoStatus::ConfigError
        );
        assert_eq!(guard(|| panic!("boom")), LosmimoStatus::Panic);
    }
}
