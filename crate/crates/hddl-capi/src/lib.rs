//! C ABI over the hddl toolchain.
//!
//! Conventions: UTF-8 `char*` in, library-allocated `char*` out (release
//! with [`hddl_string_free`]), opaque instance handles, and `int32_t`
//! status codes matching the CLI exit codes:
//!
//! * 0 — ok / plan found / witness accepted
//! * 1 — rejected / unsolvable within the given limits
//! * 2 — invalid argument (null pointer, non-UTF-8 text)
//! * 3 — parse or semantic error (diagnostics explain)
//! * 4 — internal error
//!
//! Every entry point catches panics; a panic never crosses the boundary.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use hddl::ground::{ground, GroundModel, GroundOptions};
use hddl::model::{analyze, compile_method_preconditions, AnalyzeOptions};
use hddl::planner::{plan, PlanOutcome, PlannerOptions, SearchLimits};
use hddl::syntax::{emit, parse_domain, parse_file, parse_problem};
use hddl::verify::witness::{parse_witness, WitnessIssue};
use hddl::verify::{verify, Stage, Verdict};

pub const HDDL_STATUS_OK: i32 = 0;
pub const HDDL_STATUS_REJECTED: i32 = 1;
pub const HDDL_STATUS_INVALID_ARGUMENT: i32 = 2;
pub const HDDL_STATUS_INPUT_ERROR: i32 = 3;
pub const HDDL_STATUS_INTERNAL: i32 = 4;

/// Opaque handle over one analyzed and grounded domain/problem pair.
pub struct HddlInstance {
    gm: GroundModel,
}

/// Options for [`hddl_instance_new`]. Passing null selects the defaults
/// (lenient requirements, compiled method preconditions, pruning on).
#[repr(C)]
pub struct HddlOptions {
    pub strict_requirements: bool,
    pub compile_method_preconditions: bool,
    pub prune: bool,
}

impl Default for HddlOptions {
    fn default() -> Self {
        HddlOptions { strict_requirements: false, compile_method_preconditions: true, prune: true }
    }
}

/// Search limits for [`hddl_plan`]. Zero or negative fields select the
/// defaults (1e6 nodes, 60 seconds, unbounded deepening); `exhaustive`
/// removes the node and time budgets entirely.
#[repr(C)]
pub struct HddlLimits {
    pub max_nodes: u64,
    pub max_seconds: f64,
    pub max_decompositions: i64,
    pub max_plan_length: i64,
    pub exhaustive: bool,
}

unsafe fn text_in<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(HDDL_STATUS_INVALID_ARGUMENT);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| HDDL_STATUS_INVALID_ARGUMENT)
}

unsafe fn string_out(text: String, out: *mut *mut c_char) {
    if out.is_null() {
        return;
    }
    // Interior NULs cannot be produced by the renderers; replace
    // defensively rather than fail.
    let c = CString::new(text)
        .unwrap_or_else(|e| CString::new(e.into_vec().into_iter().filter(|&b| b != 0).collect::<Vec<u8>>()).unwrap());
    *out = c.into_raw();
}

fn diagnostics_json(diags: &hddl::diag::Diagnostics) -> String {
    diags.iter().map(|d| d.render_json()).collect::<Vec<_>>().join("\n")
}

fn build_instance(
    domain_text: &str,
    problem_text: &str,
    opts: &HddlOptions,
) -> Result<GroundModel, (i32, String)> {
    let domain = parse_domain("domain", domain_text).map_err(|d| (HDDL_STATUS_INPUT_ERROR, d.render_json()))?;
    let problem = parse_problem("problem", problem_text).map_err(|d| (HDDL_STATUS_INPUT_ERROR, d.render_json()))?;
    let (model, diags) = analyze(
        &domain,
        &problem,
        &AnalyzeOptions { strict_requirements: opts.strict_requirements },
    );
    let rendered = diagnostics_json(&diags);
    let mut model = model.ok_or((HDDL_STATUS_INPUT_ERROR, rendered.clone()))?;
    if opts.compile_method_preconditions {
        model = compile_method_preconditions(model);
    } else {
        for m in &mut model.methods {
            m.precondition = None;
        }
    }
    let gm = ground(&model, &GroundOptions { prune: opts.prune })
        .map_err(|e| (HDDL_STATUS_INPUT_ERROR, format!("{{\"error\":\"{e}\"}}")))?;
    Ok(gm)
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn hddl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse and semantically check a domain/problem pair. Diagnostics (JSON
/// lines) are written to `out_diagnostics` when non-null.
///
/// # Safety
/// `domain_text` and `problem_text` must be valid NUL-terminated strings;
/// `out_diagnostics`, when non-null, must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hddl_validate(
    domain_text: *const c_char,
    problem_text: *const c_char,
    strict_requirements: bool,
    out_diagnostics: *mut *mut c_char,
) -> i32 {
    catch_unwind(AssertUnwindSafe(|| {
        let domain = match text_in(domain_text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let problem = match text_in(problem_text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let opts = HddlOptions { strict_requirements, ..HddlOptions::default() };
        match build_instance(domain, problem, &opts) {
            Ok(_) => HDDL_STATUS_OK,
            Err((code, diags)) => {
                string_out(diags, out_diagnostics);
                code
            }
        }
    }))
    .unwrap_or(HDDL_STATUS_INTERNAL)
}

/// Build an instance handle for planning and verification. On success the
/// handle is written to `out_instance` and must be released with
/// [`hddl_instance_free`].
///
/// # Safety
/// Text pointers as in [`hddl_validate`]; `options` may be null;
/// `out_instance` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hddl_instance_new(
    domain_text: *const c_char,
    problem_text: *const c_char,
    options: *const HddlOptions,
    out_instance: *mut *mut HddlInstance,
    out_diagnostics: *mut *mut c_char,
) -> i32 {
    catch_unwind(AssertUnwindSafe(|| {
        if out_instance.is_null() {
            return HDDL_STATUS_INVALID_ARGUMENT;
        }
        let domain = match text_in(domain_text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let problem = match text_in(problem_text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let default_opts = HddlOptions::default();
        let opts = if options.is_null() { &default_opts } else { &*options };
        match build_instance(domain, problem, opts) {
            Ok(gm) => {
                *out_instance = Box::into_raw(Box::new(HddlInstance { gm }));
                HDDL_STATUS_OK
            }
            Err((code, diags)) => {
                string_out(diags, out_diagnostics);
                code
            }
        }
    }))
    .unwrap_or(HDDL_STATUS_INTERNAL)
}

/// Release an instance handle. Null is ignored.
///
/// # Safety
/// `instance` must come from [`hddl_instance_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hddl_instance_free(instance: *mut HddlInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Write the ground model listing of an instance.
///
/// # Safety
/// `instance` must be a live handle; `out_listing` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hddl_instance_ground_listing(
    instance: *const HddlInstance,
    out_listing: *mut *mut c_char,
) -> i32 {
    catch_unwind(AssertUnwindSafe(|| {
        if instance.is_null() || out_listing.is_null() {
            return HDDL_STATUS_INVALID_ARGUMENT;
        }
        string_out((*instance).gm.emit_listing(), out_listing);
        HDDL_STATUS_OK
    }))
    .unwrap_or(HDDL_STATUS_INTERNAL)
}

/// Run the planner. On status 0 the witness text is written to
/// `out_witness`; search statistics (key=value lines) go to `out_stats`
/// when non-null.
///
/// # Safety
/// `instance` must be a live handle; `limits` may be null; out pointers,
/// when non-null, must be valid.
#[no_mangle]
pub unsafe extern "C" fn hddl_plan(
    instance: *const HddlInstance,
    limits: *const HddlLimits,
    out_witness: *mut *mut c_char,
    out_stats: *mut *mut c_char,
) -> i32 {
    catch_unwind(AssertUnwindSafe(|| {
        if instance.is_null() {
            return HDDL_STATUS_INVALID_ARGUMENT;
        }
        let gm = &(*instance).gm;
        let search_limits = if limits.is_null() {
            SearchLimits::default()
        } else {
            let l = &*limits;
            let mut s = if l.exhaustive { SearchLimits::exhaustive() } else { SearchLimits::default() };
            if !l.exhaustive {
                if l.max_nodes > 0 {
                    s.node_budget = Some(l.max_nodes);
                }
                if l.max_seconds > 0.0 {
                    s.wall_clock = Some(Duration::from_secs_f64(l.max_seconds));
                }
            }
            if l.max_decompositions >= 0 {
                s.max_decompositions = Some(l.max_decompositions as u32);
            }
            if l.max_plan_length >= 0 {
                s.max_plan_length = Some(l.max_plan_length as u32);
            }
            s
        };
        match plan(gm, &search_limits, &PlannerOptions::default()) {
            PlanOutcome::Solution { plan: p, tree, stats } => {
                let witness = hddl::verify::witness::emit_witness(gm, &p, &tree);
                let verdict = match parse_witness(gm, &witness) {
                    Ok((p2, t2)) => verify(gm, &p2, &t2),
                    Err(_) => Verdict::rejected(Stage::Parse, "witness", "round trip failed"),
                };
                if !verdict.accepted {
                    return HDDL_STATUS_INTERNAL;
                }
                string_out(witness, out_witness);
                string_out(stats.render(), out_stats);
                HDDL_STATUS_OK
            }
            PlanOutcome::UnsolvableWithinLimits { stats, .. }
            | PlanOutcome::ProvenUnsolvable { stats } => {
                string_out(stats.render(), out_stats);
                HDDL_STATUS_REJECTED
            }
        }
    }))
    .unwrap_or(HDDL_STATUS_INTERNAL)
}

/// Check a witness against the instance. Status 0 means accepted, 1
/// rejected (verdict text in `out_verdict`), 3 malformed witness.
///
/// # Safety
/// `instance` must be a live handle; `witness_text` a valid string.
#[no_mangle]
pub unsafe extern "C" fn hddl_verify(
    instance: *const HddlInstance,
    witness_text: *const c_char,
    out_verdict: *mut *mut c_char,
) -> i32 {
    catch_unwind(AssertUnwindSafe(|| {
        if instance.is_null() {
            return HDDL_STATUS_INVALID_ARGUMENT;
        }
        let gm = &(*instance).gm;
        let text = match text_in(witness_text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match parse_witness(gm, text) {
            Ok((p, t)) => {
                let verdict = verify(gm, &p, &t);
                let code =
                    if verdict.accepted { HDDL_STATUS_OK } else { HDDL_STATUS_REJECTED };
                string_out(verdict.render(), out_verdict);
                code
            }
            Err(WitnessIssue::Syntax(msg)) => {
                string_out(format!("malformed witness: {msg}"), out_verdict);
                HDDL_STATUS_INPUT_ERROR
            }
            Err(WitnessIssue::Mapping(msg)) => {
                string_out(Verdict::rejected(Stage::Mapping, "witness", msg).render(), out_verdict);
                HDDL_STATUS_REJECTED
            }
        }
    }))
    .unwrap_or(HDDL_STATUS_INTERNAL)
}

/// Reformat a domain or problem file into canonical form.
///
/// # Safety
/// `text` must be a valid string; out pointers as usual.
#[no_mangle]
pub unsafe extern "C" fn hddl_format(
    text: *const c_char,
    out_formatted: *mut *mut c_char,
    out_diagnostic: *mut *mut c_char,
) -> i32 {
    catch_unwind(AssertUnwindSafe(|| {
        let text = match text_in(text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match parse_file("input", text) {
            Ok(ast) => {
                string_out(emit(&ast), out_formatted);
                HDDL_STATUS_OK
            }
            Err(d) => {
                string_out(d.render_json(), out_diagnostic);
                HDDL_STATUS_INPUT_ERROR
            }
        }
    }))
    .unwrap_or(HDDL_STATUS_INTERNAL)
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hddl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
