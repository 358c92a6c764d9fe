use std::ffi::{c_char, CStr, CString};
use std::ptr;

use terc_ffi::*;

const SCHEMA: &str = "terc-schema 1\nstep_seconds 0.5\n\
entity uid u16 static instance_id\n\
entity x f32 fast position\n\
entity y f32 fast position\n\
scalar score u32 slow generic\n\
plane seen 3 2 bool\n";

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = terc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn record(uid: u16, x: f32, y: f32) -> Vec<u8> {
    let mut r = uid.to_le_bytes().to_vec();
    r.extend_from_slice(&x.to_le_bytes());
    r.extend_from_slice(&y.to_le_bytes());
    r
}

unsafe fn schema() -> *mut TercSchema {
    let mut s = ptr::null_mut();
    assert_eq!(terc_schema_from_text(cstr(SCHEMA).as_ptr(), &mut s), TercStatus::Ok);
    s
}

unsafe fn two_step_replay(schema: *const TercSchema, id: &str) -> *mut TercReplay {
    let mut r = ptr::null_mut();
    assert_eq!(terc_replay_new(schema, cstr(id).as_ptr(), cstr("api").as_ptr(), &mut r), TercStatus::Ok);
    for step in [0u32, 2] {
        let score = (step * 10).to_le_bytes();
        assert_eq!(terc_replay_push_observation(r, step, score.as_ptr(), 4), TercStatus::Ok);
        for uid in [3u16, 1] {
            let rec = record(uid, uid as f32 * 4.0, step as f32);
            assert_eq!(terc_replay_push_entity(r, rec.as_ptr(), rec.len()), TercStatus::Ok);
        }
        let px = [1u8, 0, 0, 0, 0, step as u8 / 2];
        assert_eq!(terc_replay_set_plane(r, 0, px.as_ptr(), px.len()), TercStatus::Ok);
    }
    assert_eq!(terc_replay_finish(r, 4, 5, false, 0), TercStatus::Ok);
    r
}

#[test]
fn schema_accessors() {
    unsafe {
        let s = schema();
        assert_eq!(terc_schema_record_width(s), 10);
        assert_eq!(terc_schema_scalar_width(s), 4);
        assert_ne!(terc_schema_hash(s), 0);
        let mut needed = 0;
        assert_eq!(terc_schema_text(s, ptr::null_mut(), 0, &mut needed), TercStatus::BufferTooSmall);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(terc_schema_text(s, buf.as_mut_ptr(), buf.len(), &mut needed), TercStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), SCHEMA);
        terc_schema_free(s);
        assert!(!CStr::from_ptr(terc_version()).to_bytes().is_empty());
    }
}

#[test]
fn schema_errors_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = cstr("terc-schema 1\nentity a u8 static generic\n");
        assert_eq!(terc_schema_from_text(bad.as_ptr(), &mut s), TercStatus::Schema);
        assert!(s.is_null());
        assert!(last_error().contains("instance_id"));
        assert_eq!(terc_schema_from_text(ptr::null(), &mut s), TercStatus::NullArgument);
        assert_eq!(terc_schema_hash(ptr::null()), 0);
        terc_schema_free(ptr::null_mut());
    }
}

#[test]
fn write_read_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = cstr(dir.path().join("api.terc").to_str().unwrap());
    unsafe {
        let s = schema();
        let r = two_step_replay(s, "api-1");
        let mut w = ptr::null_mut();
        assert_eq!(terc_writer_create(path.as_ptr(), s, &mut w), TercStatus::Ok);
        let mut ord = 9;
        assert_eq!(terc_writer_append(w, r, &mut ord), TercStatus::Ok);
        assert_eq!(ord, 0);
        assert_eq!(terc_writer_append(w, r, ptr::null_mut()), TercStatus::Ok);
        assert_eq!(terc_writer_finalize(w), TercStatus::Ok);
        assert_eq!(terc_writer_append(w, r, ptr::null_mut()), TercStatus::Finalized);
        terc_writer_free(w);

        let mut rd = ptr::null_mut();
        assert_eq!(terc_reader_open(path.as_ptr(), &mut rd), TercStatus::Ok);
        assert_eq!(terc_reader_entry_count(rd), 2);
        let mut meta = ptr::null_mut();
        assert_eq!(terc_reader_read(rd, 1, TercReadLevel::MetadataOnly, &mut meta), TercStatus::Ok);
        assert_eq!(terc_replay_observation_count(meta), 0);
        assert_eq!(terc_replay_action_count(meta), 5);
        let small = terc_reader_decompressed_bytes(rd);

        let mut back = ptr::null_mut();
        assert_eq!(terc_reader_read(rd, 1, TercReadLevel::Full, &mut back), TercStatus::Ok);
        assert!(terc_reader_decompressed_bytes(rd) > small);
        assert_eq!(CStr::from_ptr(terc_replay_id(back)).to_str().unwrap(), "api-1");
        assert_eq!(terc_replay_declared_steps(back), 4);
        assert_eq!(terc_replay_observation_count(back), 2);
        let mut step = 0;
        assert_eq!(terc_replay_observation_step(back, 1, &mut step), TercStatus::Ok);
        assert_eq!(step, 2);
        let mut n = 0;
        assert_eq!(terc_replay_entity_count(back, 1, &mut n), TercStatus::Ok);
        assert_eq!(n, 2);
        let mut buf = [0u8; 10];
        assert_eq!(terc_replay_entity(back, 1, 0, buf.as_mut_ptr(), 10), TercStatus::Ok);
        assert_eq!(buf.to_vec(), record(1, 4.0, 2.0));
        assert_eq!(terc_replay_entity(back, 1, 0, buf.as_mut_ptr(), 9), TercStatus::BufferTooSmall);
        assert_eq!(terc_replay_entity(back, 1, 7, buf.as_mut_ptr(), 10), TercStatus::OutOfRange);

        let mut none = ptr::null_mut();
        assert_eq!(terc_reader_read(rd, 2, TercReadLevel::Full, &mut none), TercStatus::OutOfRange);
        assert!(none.is_null());

        let mut report = TercVerifyReport::default();
        assert_eq!(terc_verify(path.as_ptr(), &mut report), TercStatus::Ok);
        assert_eq!(report.entries_ok, 2);
        assert!(report.index_consistent);

        for p in [meta, back] {
            terc_replay_free(p);
        }
        terc_reader_free(rd);
        terc_replay_free(r);
        terc_schema_free(s);
    }
}

#[test]
fn builder_rejects_bad_input() {
    unsafe {
        let s = schema();
        let mut r = ptr::null_mut();
        assert_eq!(terc_replay_new(s, cstr("x").as_ptr(), cstr("t").as_ptr(), &mut r), TercStatus::Ok);
        let rec = record(1, 0.0, 0.0);
        // No observation yet.
        assert_eq!(terc_replay_push_entity(r, rec.as_ptr(), rec.len()), TercStatus::InvalidArgument);
        // Wrong scalar row width.
        assert_eq!(terc_replay_push_observation(r, 0, [0u8; 3].as_ptr(), 3), TercStatus::InvalidArgument);
        assert_eq!(terc_replay_push_observation(r, 0, [0u8; 4].as_ptr(), 4), TercStatus::Ok);
        assert_eq!(terc_replay_push_entity(r, rec.as_ptr(), 9), TercStatus::InvalidArgument);
        assert_eq!(terc_replay_set_plane(r, 1, [0u8; 6].as_ptr(), 6), TercStatus::OutOfRange);
        assert_eq!(terc_replay_set_plane(r, 0, [2u8; 6].as_ptr(), 6), TercStatus::InvalidArgument);
        // Declared steps must cover observed steps.
        assert_eq!(terc_replay_push_observation(r, 5, [0u8; 4].as_ptr(), 4), TercStatus::Ok);
        assert_eq!(terc_replay_finish(r, 3, 0, false, 0), TercStatus::InvalidReplay);
        assert!(!last_error().is_empty());
        assert_eq!(terc_replay_finish(r, 6, 0, true, -1), TercStatus::Ok);
        terc_replay_free(r);
        terc_schema_free(s);
    }
}

#[test]
fn stabilize_through_the_api() {
    unsafe {
        let s = schema();
        let mut r = ptr::null_mut();
        assert_eq!(terc_replay_new(s, cstr("x").as_ptr(), cstr("t").as_ptr(), &mut r), TercStatus::Ok);
        for (step, uid) in [(0u32, 1u16), (1, 9)] {
            assert_eq!(terc_replay_push_observation(r, step, [0u8; 4].as_ptr(), 4), TercStatus::Ok);
            let rec = record(uid, 5.0, 5.0);
            assert_eq!(terc_replay_push_entity(r, rec.as_ptr(), rec.len()), TercStatus::Ok);
        }
        assert_eq!(terc_replay_finish(r, 2, 0, false, 0), TercStatus::Ok);
        assert_eq!(terc_replay_stabilize(r, 0.5), TercStatus::Ok);
        let mut buf = [0u8; 10];
        assert_eq!(terc_replay_entity(r, 1, 0, buf.as_mut_ptr(), 10), TercStatus::Ok);
        assert_eq!(u16::from_le_bytes([buf[0], buf[1]]), 1);
        terc_replay_free(r);
        terc_schema_free(s);
    }
}

#[test]
fn store_build_query_save_load() {
    let dir = tempfile::tempdir().unwrap();
    let a = cstr(dir.path().join("a.terc").to_str().unwrap());
    let missing = cstr(dir.path().join("missing.terc").to_str().unwrap());
    let idx = cstr(dir.path().join("s.idx").to_str().unwrap());
    unsafe {
        let s = schema();
        let mut w = ptr::null_mut();
        assert_eq!(terc_writer_create(a.as_ptr(), s, &mut w), TercStatus::Ok);
        for k in 0..3 {
            let r = two_step_replay(s, &format!("r{k}"));
            assert_eq!(terc_writer_append(w, r, ptr::null_mut()), TercStatus::Ok);
            terc_replay_free(r);
        }
        assert_eq!(terc_writer_finalize(w), TercStatus::Ok);
        terc_writer_free(w);

        let paths = [a.as_ptr(), missing.as_ptr()];
        let mut store = ptr::null_mut();
        let mut failures = 0;
        assert_eq!(terc_store_build(paths.as_ptr(), 2, &mut store, &mut failures), TercStatus::Ok);
        assert_eq!(failures, 1);
        assert_eq!(terc_store_len(store), 3);

        let preds = [cstr("replay_id>=r1")];
        let pp: Vec<*const c_char> = preds.iter().map(|p| p.as_ptr()).collect();
        let mut rows = [0usize; 1];
        let mut matched = 0;
        assert_eq!(
            terc_store_query(store, pp.as_ptr(), 1, rows.as_mut_ptr(), 1, &mut matched),
            TercStatus::BufferTooSmall
        );
        assert_eq!(matched, 2);
        let mut rows = [0usize; 4];
        assert_eq!(terc_store_query(store, pp.as_ptr(), 1, rows.as_mut_ptr(), 4, &mut matched), TercStatus::Ok);
        assert_eq!(&rows[..matched], &[1, 2]);
        let mut ord = 0;
        assert_eq!(terc_store_row_ordinal(store, 2, &mut ord), TercStatus::Ok);
        assert_eq!(ord, 2);
        assert_eq!(CStr::from_ptr(terc_store_row_path(store, 0)), a.as_c_str());
        assert!(terc_store_row_path(store, 3).is_null());

        let bad = [cstr("nonexistent=1")];
        let bp: Vec<*const c_char> = bad.iter().map(|p| p.as_ptr()).collect();
        assert_eq!(
            terc_store_query(store, bp.as_ptr(), 1, rows.as_mut_ptr(), 4, &mut matched),
            TercStatus::UnknownField
        );

        assert_eq!(terc_store_save(store, idx.as_ptr()), TercStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(terc_store_load(idx.as_ptr(), &mut loaded), TercStatus::Ok);
        assert_eq!(terc_store_len(loaded), 3);
        terc_store_free(loaded);
        terc_store_free(store);
        terc_schema_free(s);
    }
}

#[test]
fn generate_from_spec_file() {
    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/specs/w1.spec");
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.spec");
    let text = std::fs::read_to_string(spec).unwrap().replace("step_count = 10000", "step_count = 30");
    std::fs::write(&small, text).unwrap();
    let small = cstr(small.to_str().unwrap());
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(
            terc_replay_generate(small.as_ptr(), 7, cstr("every_n:10").as_ptr(), &mut r),
            TercStatus::Ok
        );
        assert_eq!(terc_replay_observation_count(r), 3);
        assert_eq!(terc_replay_declared_steps(r), 30);
        terc_replay_free(r);
        assert_eq!(
            terc_replay_generate(small.as_ptr(), 7, cstr("sometimes").as_ptr(), &mut r),
            TercStatus::InvalidArgument
        );
        let mut s = ptr::null_mut();
        assert_eq!(terc_schema_from_spec_file(small.as_ptr(), &mut s), TercStatus::Ok);
        assert_eq!(terc_schema_record_width(s), 17);
        terc_schema_free(s);
    }
}
