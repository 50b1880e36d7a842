//! C ABI over the `cmcgs` environments and planners.
//!
//! Every function returns a [`CmcgsStatus`]. On failure a message is stored
//! per thread and can be read with [`cmcgs_last_error`]. Handles are opaque
//! and must be released with their `_free` function. Output arrays are
//! caller-allocated; when one is too small the call fails with
//! `CMCGS_STATUS_BUFFER_TOO_SMALL` and nothing is modified.
//!
//! # Safety
//!
//! All pointer arguments must be null or valid for the access the function
//! documents: strings NUL-terminated, arrays at least as long as the length
//! passed with them, handles obtained from this library and not yet freed.
//! A handle must not be used from two threads at once.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cmcgs::env::{layout::Layout, load_environment, Environment};
use cmcgs::params::Hyperparameters;
use cmcgs::planner::{PlanRng, Planner, PlannerKind};
use cmcgs::Error;
use rand::SeedableRng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmcgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownName = 3,
    BufferTooSmall = 4,
    EpisodeTerminated = 5,
    PlanningFailed = 6,
    Panic = 7,
}

/// Opaque environment handle.
pub struct CmcgsEnv {
    env: Box<dyn Environment>,
}

/// Opaque planner handle; owns its generator and hyperparameters.
pub struct CmcgsPlanner {
    kind: PlannerKind,
    params: Hyperparameters,
    planner: Box<dyn Planner>,
    rng: PlanRng,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(CmcgsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownEnvironment(_) | Error::UnknownPlanner(_) => CmcgsStatus::UnknownName,
            Error::EpisodeTerminated => CmcgsStatus::EpisodeTerminated,
            Error::NoExperience | Error::BudgetOverrun { .. } => CmcgsStatus::PlanningFailed,
            _ => CmcgsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> CmcgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CmcgsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CmcgsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CmcgsStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(CmcgsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write_out<T: Copy>(out: *mut T, value: T, what: &str) -> FfiResult {
    if out.is_null() {
        return Err(null(what));
    }
    *out = value;
    Ok(())
}

/// Fails unless a non-null `out` can hold `needed` values.
fn check_capacity(out: *const f64, len: usize, needed: usize) -> FfiResult {
    if !out.is_null() && len < needed {
        return Err(Failure(CmcgsStatus::BufferTooSmall, format!("buffer holds {len} values, {needed} needed")));
    }
    Ok(())
}

/// Copies `values` into `out[..len]`. A null `out` is allowed when nothing
/// needs to be written back.
unsafe fn write_slice(values: &[f64], out: *mut f64, len: usize) -> FfiResult {
    check_capacity(out, len, values.len())?;
    if !out.is_null() {
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

fn boxed_env(env: Box<dyn Environment>, out: *mut *mut CmcgsEnv) -> FfiResult {
    unsafe { write_out(out, Box::into_raw(Box::new(CmcgsEnv { env })), "out") }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len`. Returns the full message length excluding the NUL.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates an environment from a preset name or a layout JSON file path.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_new(name: *const c_char, out: *mut *mut CmcgsEnv) -> CmcgsStatus {
    guard(|| {
        let name = text(name, "name")?;
        boxed_env(load_environment(name)?, out)
    })
}

/// Creates an environment from an in-memory layout JSON document.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_from_layout_json(json: *const c_char, out: *mut *mut CmcgsEnv) -> CmcgsStatus {
    guard(|| {
        let json = text(json, "json")?;
        boxed_env(Layout::from_json(json)?.build("custom")?, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_free(env: *mut CmcgsEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_state_dim(env: *const CmcgsEnv, out: *mut usize) -> CmcgsStatus {
    guard(|| {
        let env = env.as_ref().ok_or_else(|| null("env"))?;
        write_out(out, env.env.state_dim(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_action_dim(env: *const CmcgsEnv, out: *mut usize) -> CmcgsStatus {
    guard(|| {
        let env = env.as_ref().ok_or_else(|| null("env"))?;
        write_out(out, env.env.action_dim(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_remaining_steps(env: *const CmcgsEnv, out: *mut usize) -> CmcgsStatus {
    guard(|| {
        let env = env.as_ref().ok_or_else(|| null("env"))?;
        write_out(out, env.env.remaining_steps(), "out")
    })
}

/// Resets the episode and writes the initial state into `state[..state_len]`.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_reset(
    env: *mut CmcgsEnv,
    seed: u64,
    state: *mut f64,
    state_len: usize,
) -> CmcgsStatus {
    guard(|| {
        let env = handle(env, "env")?;
        check_capacity(state, state_len, env.env.state_dim())?;
        let s = env.env.reset(seed);
        write_slice(&s, state, state_len)
    })
}

/// Applies one action. `state`, `reward` and `terminal` may be null.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_env_step(
    env: *mut CmcgsEnv,
    action: *const f64,
    action_len: usize,
    state: *mut f64,
    state_len: usize,
    reward: *mut f64,
    terminal: *mut bool,
) -> CmcgsStatus {
    guard(|| {
        let env = handle(env, "env")?;
        if action.is_null() {
            return Err(null("action"));
        }
        check_capacity(state, state_len, env.env.state_dim())?;
        let a = std::slice::from_raw_parts(action, action_len);
        let t = env.env.step(a)?;
        write_slice(&t.state, state, state_len)?;
        if !reward.is_null() {
            *reward = t.reward;
        }
        if !terminal.is_null() {
            *terminal = t.terminal;
        }
        Ok(())
    })
}

/// Creates a planner by name (`cmcgs`, `cem`, `mcts-pw`, `random`) with
/// default hyperparameters and a generator seeded with `seed`.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_planner_new(kind: *const c_char, seed: u64, out: *mut *mut CmcgsPlanner) -> CmcgsStatus {
    guard(|| {
        let kind: PlannerKind = text(kind, "kind")?.parse()?;
        let params = Hyperparameters::default();
        let planner = kind.build(&params);
        let handle = CmcgsPlanner { kind, params, planner, rng: PlanRng::seed_from_u64(seed) };
        write_out(out, Box::into_raw(Box::new(handle)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cmcgs_planner_free(planner: *mut CmcgsPlanner) {
    if !planner.is_null() {
        drop(Box::from_raw(planner));
    }
}

/// Overrides one hyperparameter by its config key.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_planner_set_param(
    planner: *mut CmcgsPlanner,
    key: *const c_char,
    value: f64,
) -> CmcgsStatus {
    guard(|| {
        let p = handle(planner, "planner")?;
        let key = text(key, "key")?;
        p.params.set(key, value).map_err(|e| Failure(CmcgsStatus::InvalidArgument, e.to_string()))?;
        p.planner = p.kind.build(&p.params);
        Ok(())
    })
}

/// Plans from the environment's current state with at most `budget`
/// simulation steps on a private copy. The environment itself is not
/// advanced. Writes the action into `action[..action_len]` and, if
/// `steps_used` is non-null, the number of simulation steps spent.
#[no_mangle]
pub unsafe extern "C" fn cmcgs_planner_plan(
    planner: *mut CmcgsPlanner,
    env: *const CmcgsEnv,
    budget: u64,
    action: *mut f64,
    action_len: usize,
    steps_used: *mut u64,
) -> CmcgsStatus {
    guard(|| {
        let p = handle(planner, "planner")?;
        let env = env.as_ref().ok_or_else(|| null("env"))?;
        if action.is_null() {
            return Err(null("action"));
        }
        check_capacity(action, action_len, env.env.action_dim())?;
        if budget == 0 {
            return Err(Failure(CmcgsStatus::InvalidArgument, "budget must be at least 1".into()));
        }
        let mut sim = env.env.boxed_clone();
        let snapshot = env.env.snapshot();
        let before = sim.steps_taken();
        let result = p.planner.plan(sim.as_mut(), &snapshot, budget, &mut p.rng)?;
        write_slice(&result.action, action, action_len)?;
        if !steps_used.is_null() {
            *steps_used = sim.steps_taken() - before;
        }
        Ok(())
    })
}
