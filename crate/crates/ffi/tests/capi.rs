use std::ffi::{CStr, CString};
use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use guessga_ffi::*;

fn last_error() -> String {
    let p = guessga_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_config(iterations: usize, n_trials: usize) -> *mut GuessgaConfig {
    let cfg = guessga_config_new();
    unsafe {
        assert_eq!(
            guessga_config_set_iterations(cfg, iterations),
            GuessgaStatus::Ok
        );
        assert_eq!(
            guessga_config_set_n_trials(cfg, n_trials),
            GuessgaStatus::Ok
        );
    }
    cfg
}

#[test]
fn fitness_functions() {
    let pool = [0.0, 5.0, 10.0];
    let mut out = 0.0;
    unsafe {
        assert_eq!(
            guessga_quadratic_fitness(pool.as_ptr(), 3, 1, 1.0, &mut out),
            GuessgaStatus::Ok
        );
        assert_eq!(out, -50.0);
        let mut wta = [0.0; 3];
        assert_eq!(
            guessga_winner_take_all_fitness(pool.as_ptr(), 3, 1.0, wta.as_mut_ptr()),
            GuessgaStatus::Ok
        );
        assert_eq!(wta, [0.5, 2.0, 0.5]);

        assert_eq!(
            guessga_quadratic_fitness(pool.as_ptr(), 1, 0, 1.0, &mut out),
            GuessgaStatus::InvalidArgument
        );
        assert!(last_error().contains("belief"), "{}", last_error());
        assert_eq!(
            guessga_quadratic_fitness(ptr::null(), 3, 0, 1.0, &mut out),
            GuessgaStatus::NullPointer
        );
        assert!(last_error().contains("pool"));
        assert_eq!(
            guessga_quadratic_fitness(pool.as_ptr(), 3, 7, 1.0, &mut out),
            GuessgaStatus::InvalidArgument
        );
    }
    assert_eq!(guessga_quadratic_payoff(3.0, 1.0, 5.0), -4.0);
}

#[test]
fn config_setters_validate() {
    let cfg = guessga_config_new();
    unsafe {
        assert_eq!(
            guessga_config_set_q(cfg, 1.5),
            GuessgaStatus::InvalidArgument
        );
        assert!(last_error().contains('q'));
        assert_eq!(
            guessga_config_set_pool_size(cfg, 1),
            GuessgaStatus::InvalidArgument
        );
        assert_eq!(
            guessga_config_set_rho(cfg, -0.5),
            GuessgaStatus::InvalidArgument
        );
        assert_eq!(
            guessga_config_set_iterations(cfg, 0),
            GuessgaStatus::InvalidArgument
        );
        assert_eq!(
            guessga_config_set_q(ptr::null_mut(), 0.5),
            GuessgaStatus::NullPointer
        );

        assert_eq!(guessga_config_set_q(cfg, 0.25), GuessgaStatus::Ok);
        assert_eq!(
            guessga_config_set_payoff(cfg, GuessgaPayoff::WinnerTakeAll),
            GuessgaStatus::Ok
        );
        assert_eq!(guessga_config_set_seed(cfg, 11), GuessgaStatus::Ok);
        assert_eq!(guessga_config_set_epsilon(cfg, 0.3), GuessgaStatus::Ok);

        let json = guessga_config_to_json(cfg);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        guessga_string_free(json);
        assert!(text.contains("\"q\": 0.25"), "{text}");
        assert!(text.contains("winner_take_all"));

        // rejected edits leave the config untouched, and the JSON round-trips
        let c_text = CString::new(text.clone()).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(
            guessga_config_from_json(c_text.as_ptr(), &mut back),
            GuessgaStatus::Ok
        );
        let again = guessga_config_to_json(back);
        assert_eq!(CStr::from_ptr(again).to_str().unwrap(), text);
        guessga_string_free(again);
        guessga_config_free(back);
        guessga_config_free(cfg);

        let bad = CString::new(r#"{"iterations": "many"}"#).unwrap();
        let mut slot = ptr::null_mut();
        assert_eq!(
            guessga_config_from_json(bad.as_ptr(), &mut slot),
            GuessgaStatus::InvalidArgument
        );
        assert!(slot.is_null());
        assert!(guessga_config_to_json(ptr::null()).is_null());
    }
}

#[test]
fn batch_handles() {
    let cfg = small_config(25, 8);
    unsafe {
        let mut batch = ptr::null_mut();
        assert_eq!(guessga_run_batch(cfg, &mut batch), GuessgaStatus::Ok);
        assert_eq!(guessga_batch_n_trials(batch), 8);
        assert_eq!(guessga_batch_iterations(batch), 25);

        let mut mean = 0.0;
        let mut var = 0.0;
        assert_eq!(
            guessga_batch_mean_final(batch, &mut mean),
            GuessgaStatus::Ok
        );
        assert_eq!(
            guessga_batch_variance_final(batch, &mut var),
            GuessgaStatus::Ok
        );
        let mut finals = [0.0; 8];
        assert_eq!(
            guessga_batch_final_means(batch, finals.as_mut_ptr(), 8),
            GuessgaStatus::Ok
        );
        let m = finals.iter().sum::<f64>() / 8.0;
        let v = finals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 8.0;
        assert!((m - mean).abs() < 1e-12 && (v - var).abs() < 1e-12);

        let mut traj = [0.0; 25];
        assert_eq!(
            guessga_batch_mean_trajectory(batch, traj.as_mut_ptr(), 25),
            GuessgaStatus::Ok
        );
        assert!((traj[24] - mean).abs() < 1e-12);
        assert_eq!(
            guessga_batch_final_means(batch, finals.as_mut_ptr(), 3),
            GuessgaStatus::InvalidArgument
        );
        assert_eq!(
            guessga_batch_mean_final(ptr::null(), &mut mean),
            GuessgaStatus::NullPointer
        );
        assert_eq!(guessga_batch_n_trials(ptr::null()), 0);
        guessga_batch_free(batch);
        guessga_batch_free(ptr::null_mut());

        assert_eq!(
            guessga_run_batch(cfg, ptr::null_mut()),
            GuessgaStatus::NullPointer
        );
        guessga_config_free(cfg);
    }
}

#[test]
fn sweep_handles() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(20, 6);
    unsafe {
        let mut sweep = ptr::null_mut();
        assert_eq!(
            guessga_sweep_q(cfg, ptr::null(), 0, &mut sweep),
            GuessgaStatus::Ok
        );
        assert_eq!(guessga_sweep_len(sweep), 11);
        let mut pt = GuessgaSweepPoint::default();
        assert_eq!(guessga_sweep_point(sweep, 10, &mut pt), GuessgaStatus::Ok);
        assert_eq!(pt.axis_value, 1.0);
        assert_eq!(pt.n_trials, 6);
        assert_eq!(
            guessga_sweep_point(sweep, 11, &mut pt),
            GuessgaStatus::InvalidArgument
        );

        let csv = tmp.path().join("s.csv");
        let c_path = CString::new(csv.to_str().unwrap()).unwrap();
        assert_eq!(
            guessga_sweep_write_csv(sweep, c_path.as_ptr()),
            GuessgaStatus::Ok
        );
        assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 12);
        let bad = CString::new(tmp.path().join("no/such/dir/s.csv").to_str().unwrap()).unwrap();
        assert_eq!(
            guessga_sweep_write_csv(sweep, bad.as_ptr()),
            GuessgaStatus::Io
        );
        guessga_sweep_free(sweep);

        let qs = [0.9, 0.1];
        assert_eq!(
            guessga_sweep_q(cfg, qs.as_ptr(), 2, &mut sweep),
            GuessgaStatus::Ok
        );
        assert_eq!(guessga_sweep_point(sweep, 0, &mut pt), GuessgaStatus::Ok);
        assert_eq!(pt.axis_value, 0.1);
        guessga_sweep_free(sweep);

        let out_of_range = [0.5, 1.2];
        assert_eq!(
            guessga_sweep_q(cfg, out_of_range.as_ptr(), 2, &mut sweep),
            GuessgaStatus::InvalidArgument
        );
        guessga_config_free(cfg);
    }
}

#[test]
fn rerun_matches_original_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = guessga::Config {
        iterations: 15,
        n_trials: 5,
        ..Default::default()
    };
    let first = tmp.path().join("first");
    let (manifest, outcome) =
        guessga::run::run_to_dir(&guessga::Command::SweepQ, &config, &first).unwrap();
    let second = tmp.path().join("second");
    let m = CString::new(manifest.to_str().unwrap()).unwrap();
    let d = CString::new(second.to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(
            guessga_rerun_manifest(m.as_ptr(), d.as_ptr()),
            GuessgaStatus::Ok
        );
        let missing = CString::new(tmp.path().join("none.json").to_str().unwrap()).unwrap();
        assert_eq!(
            guessga_rerun_manifest(missing.as_ptr(), d.as_ptr()),
            GuessgaStatus::Io
        );
        assert_eq!(
            guessga_rerun_manifest(ptr::null(), ptr::null()),
            GuessgaStatus::NullPointer
        );
    }
    for (name, _) in &outcome.files {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap()
        );
    }
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(guessga_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_the_api() {
    let header = fs::read_to_string(header_dir().join("guessga.h")).unwrap();
    for name in [
        "guessga_last_error",
        "guessga_config_new",
        "guessga_config_from_json",
        "guessga_run_batch",
        "guessga_batch_mean_trajectory",
        "guessga_sweep_q",
        "guessga_sweep_point",
        "guessga_rerun_manifest",
        "typedef struct GuessgaConfig GuessgaConfig",
        "GUESSGA_STATUS_INVALID_ARGUMENT = 2",
        "GUESSGA_PAYOFF_WINNER_TAKE_ALL",
        "size_t n_trials",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    fs::write(
        &src,
        "#include \"guessga.h\"\n\
         int main(void) {\n\
           GuessgaConfig *cfg = guessga_config_new();\n\
           GuessgaStatus st = guessga_config_set_q(cfg, 0.5);\n\
           guessga_config_free(cfg);\n\
           return st == GUESSGA_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_dir())
        .arg(&src)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
}
