//! C ABI for the evacuation game engine.
//!
//! Every object is an opaque handle created by an `evac_*_new`/`parse`
//! function and released by the matching `evac_*_free`. Functions return an
//! [`EvacStatus`]; on failure [`evac_last_error`] describes what went wrong.
//! Strings handed out by the library are NUL-terminated UTF-8 and must be
//! released with [`evac_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use evac_core::harness::{replay, solvable, ReplayFile};
use evac_core::session::{CommandRecord, Session};
use evac_core::{parse_scenario, validate_scenario, Game, InputFrame, LoseReason, NavigatorInput, Outcome, ScenarioSpec, Turn};
use evac_core::vehicle::DriverInput;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvacStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidScenario = 4,
    InvalidArgument = 5,
    BadCommand = 6,
    ReplayMismatch = 7,
    SearchBoundExceeded = 8,
    Panic = 99,
}

/// Values for the `turn` argument of [`evac_game_step`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvacTurn {
    None = 0,
    Left = 1,
    Straight = 2,
    Right = 3,
}

/// Values for the `radio` argument of [`evac_game_step`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvacRadio {
    Unchanged = 0,
    Off = 1,
    On = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvacOutcome {
    InProgress = 0,
    Win = 1,
    LoseDeadEnd = 2,
    LoseShelterIgnored = 3,
    LoseFireContact = 4,
}

impl From<Outcome> for EvacOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::InProgress => Self::InProgress,
            Outcome::Win => Self::Win,
            Outcome::Lose(LoseReason::DeadEnd) => Self::LoseDeadEnd,
            Outcome::Lose(LoseReason::ShelterIgnored) => Self::LoseShelterIgnored,
            Outcome::Lose(LoseReason::FireContact) => Self::LoseFireContact,
        }
    }
}

pub struct EvacScenario(ScenarioSpec);
pub struct EvacGame(Game);
pub struct EvacSession(Session);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(EvacStatus, String);

type R<T> = Result<T, Fail>;

fn fail<T>(status: EvacStatus, msg: impl Into<String>) -> R<T> {
    Err(Fail(status, msg.into()))
}

/// Runs `body`, turning errors and panics into a status code.
fn guard(body: impl FnOnce() -> R<()>) -> EvacStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EvacStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EvacStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> R<&'a str> {
    if p.is_null() {
        return fail(EvacStatus::NullArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(EvacStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> R<&'a T> {
    p.as_ref().map_or_else(|| fail(EvacStatus::NullArgument, format!("{name} is null")), Ok)
}

unsafe fn mut_arg<'a, T>(p: *mut T, name: &str) -> R<&'a mut T> {
    p.as_mut().map_or_else(|| fail(EvacStatus::NullArgument, format!("{name} is null")), Ok)
}

unsafe fn put<T>(out: *mut T, value: T) -> R<()> {
    if out.is_null() {
        return fail(EvacStatus::NullArgument, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> R<()> {
    let c = CString::new(s).or_else(|_| fail(EvacStatus::Panic, "string contains NUL"))?;
    if out.is_null() {
        return fail(EvacStatus::NullArgument, "output pointer is null");
    }
    out.write(c.into_raw());
    Ok(())
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn evac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn evac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses scenario JSON. Structural checks only; see [`evac_scenario_validate`].
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_parse(json: *const c_char, out: *mut *mut EvacScenario) -> EvacStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let spec = parse_scenario(text).or_else(|e| fail(EvacStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(EvacScenario(spec))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn evac_scenario_free(scenario: *mut EvacScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Writes the validation report as JSON: `{"errors": [...], "warnings": [...]}`.
/// `accepted` is set to 1 when there are no errors.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_validate(
    scenario: *const EvacScenario,
    report_json: *mut *mut c_char,
    accepted: *mut i32,
) -> EvacStatus {
    guard(|| {
        let spec = &ref_arg(scenario, "scenario")?.0;
        let report = validate_scenario(spec);
        let json = serde_json::to_string(&report).or_else(|e| fail(EvacStatus::Panic, e.to_string()))?;
        put(accepted, i32::from(report.is_accepted()))?;
        put_string(report_json, json)
    })
}

/// Canonical JSON text of the scenario.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_serialize(scenario: *const EvacScenario, out: *mut *mut c_char) -> EvacStatus {
    guard(|| put_string(out, evac_core::serialize_scenario(&ref_arg(scenario, "scenario")?.0)))
}

/// Hex SHA-256 of the canonical text, as used in replay headers.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_digest(scenario: *const EvacScenario, out: *mut *mut c_char) -> EvacStatus {
    guard(|| put_string(out, ref_arg(scenario, "scenario")?.0.content_digest()))
}

/// Sets `out` to 1 if some input sequence wins, else 0.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_solvable(scenario: *const EvacScenario, out: *mut i32) -> EvacStatus {
    guard(|| {
        let spec = &ref_arg(scenario, "scenario")?.0;
        match solvable(spec) {
            Ok(yes) => put(out, i32::from(yes)),
            Err(e) => fail(EvacStatus::SearchBoundExceeded, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn evac_game_new(scenario: *const EvacScenario, out: *mut *mut EvacGame) -> EvacStatus {
    guard(|| {
        let spec = ref_arg(scenario, "scenario")?.0.clone();
        let game = Game::new(spec).or_else(|e| fail(EvacStatus::InvalidScenario, e.to_string()))?;
        put(out, Box::into_raw(Box::new(EvacGame(game))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn evac_game_free(game: *mut EvacGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Advances one tick. `turn` takes an [`EvacTurn`] value and `radio` an
/// [`EvacRadio`] value. Stepping a finished game leaves it unchanged.
#[no_mangle]
pub unsafe extern "C" fn evac_game_step(game: *mut EvacGame, brake: bool, turn: u32, radio: u32) -> EvacStatus {
    guard(|| {
        let game = &mut mut_arg(game, "game")?.0;
        let turn_request = match turn {
            0 => None,
            1 => Some(Turn::Left),
            2 => Some(Turn::Straight),
            3 => Some(Turn::Right),
            _ => return fail(EvacStatus::InvalidArgument, format!("turn code {turn}")),
        };
        let radio_toggle = match radio {
            0 => None,
            1 => Some(false),
            2 => Some(true),
            _ => return fail(EvacStatus::InvalidArgument, format!("radio code {radio}")),
        };
        game.step(&InputFrame {
            driver: DriverInput { brake_held: brake, turn_request },
            navigator: NavigatorInput { radio_toggle },
        });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn evac_game_restart(game: *mut EvacGame) -> EvacStatus {
    guard(|| {
        mut_arg(game, "game")?.0.restart();
        Ok(())
    })
}

/// The tick about to be simulated; equals the number of steps taken.
#[no_mangle]
pub unsafe extern "C" fn evac_game_tick(game: *const EvacGame, out: *mut u64) -> EvacStatus {
    guard(|| put(out, ref_arg(game, "game")?.0.state().tick))
}

#[no_mangle]
pub unsafe extern "C" fn evac_game_outcome(game: *const EvacGame, out: *mut EvacOutcome) -> EvacStatus {
    guard(|| put(out, ref_arg(game, "game")?.0.state().outcome.into()))
}

#[no_mangle]
pub unsafe extern "C" fn evac_game_digest(game: *const EvacGame, out: *mut *mut c_char) -> EvacStatus {
    guard(|| put_string(out, ref_arg(game, "game")?.0.digest()))
}

/// Starts a UI session on `scenario`.
#[no_mangle]
pub unsafe extern "C" fn evac_session_new(scenario: *const EvacScenario, out: *mut *mut EvacSession) -> EvacStatus {
    guard(|| {
        let spec = ref_arg(scenario, "scenario")?.0.clone();
        let session = Session::bind(spec).or_else(|e| fail(EvacStatus::InvalidScenario, e.to_string()))?;
        put(out, Box::into_raw(Box::new(EvacSession(session))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn evac_session_free(session: *mut EvacSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Queues one UI command given as JSON, e.g.
/// `{"type":"TurnRequest","payload":{"turn":"left"},"wall_time":1.25}`.
/// `accepted` is set to 0 when the command was ignored because the game is over.
#[no_mangle]
pub unsafe extern "C" fn evac_session_dispatch(
    session: *mut EvacSession,
    command_json: *const c_char,
    accepted: *mut i32,
) -> EvacStatus {
    guard(|| {
        let session = &mut mut_arg(session, "session")?.0;
        let text = str_arg(command_json, "command_json")?;
        let record: CommandRecord =
            serde_json::from_str(text).or_else(|e| fail(EvacStatus::BadCommand, e.to_string()))?;
        let ack = session.dispatch(&record).or_else(|e| fail(EvacStatus::BadCommand, e.to_string()))?;
        if !accepted.is_null() {
            accepted.write(i32::from(ack == evac_core::session::Ack::Accepted));
        }
        Ok(())
    })
}

/// Steps the session once and writes the new snapshot as JSON.
#[no_mangle]
pub unsafe extern "C" fn evac_session_tick(session: *mut EvacSession, snapshot_json: *mut *mut c_char) -> EvacStatus {
    guard(|| {
        let session = &mut mut_arg(session, "session")?.0;
        let snap = session.tick().ok_or(Fail(EvacStatus::Panic, "session has no game".into()))?;
        put_string(snapshot_json, snap.to_json())
    })
}

/// The session so far in replay-file format.
#[no_mangle]
pub unsafe extern "C" fn evac_session_export_replay(session: *const EvacSession, out: *mut *mut c_char) -> EvacStatus {
    guard(|| {
        let session = &ref_arg(session, "session")?.0;
        let file = session.export_replay().ok_or(Fail(EvacStatus::Panic, "session has no game".into()))?;
        put_string(out, file.to_text())
    })
}

/// Replays `replay_text` against `scenario` and checks the recorded digest.
#[no_mangle]
pub unsafe extern "C" fn evac_replay_verify(
    scenario: *const EvacScenario,
    replay_text: *const c_char,
    final_digest: *mut *mut c_char,
) -> EvacStatus {
    guard(|| {
        let spec = &ref_arg(scenario, "scenario")?.0;
        let text = str_arg(replay_text, "replay_text")?;
        let file = ReplayFile::parse(text).or_else(|e| fail(EvacStatus::ParseError, e.to_string()))?;
        let run = replay(&file, spec).or_else(|e| fail(EvacStatus::ReplayMismatch, e.to_string()))?;
        if final_digest.is_null() {
            return Ok(());
        }
        put_string(final_digest, run.final_digest)
    })
}
