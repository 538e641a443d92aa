use hartree_cli::config::{self, parse_config, Profile, Scenario, KEYS};
use hartree_core::evolution::{Scheme, Window};

#[test]
fn minimal_config_fills_defaults() {
    let cfg = parse_config("scenario = ground-state\nmodel.d = 3\nmodel.a = -0.1\ngrid.n = 512\ngrid.r_max = 30\n").unwrap();
    assert_eq!(cfg.scenario, Scenario::GroundState);
    assert_eq!((cfg.params.d, cfg.params.a, cfg.n, cfg.r_max), (3, -0.1, 512, 30.0));
    assert_eq!(cfg.integrator.dt, 1e-3);
    assert_eq!(cfg.integrator.scheme, Scheme::StrangSplit);
    assert_eq!(cfg.ground_state.tol, 1e-9);
    assert_eq!(cfg.initial.profile, Profile::Gaussian { sigma: 1.0 });
    assert!(cfg.initial.mass_fraction.is_none());
    // every key is present in the resolved table
    assert_eq!(cfg.resolved.len(), KEYS.len());
    assert_eq!(cfg.resolved["grid.r_max"], "30");
}

#[test]
fn coupling_below_hardy_bound_cites_it() {
    let err = parse_config("model.d = 3\nmodel.a = -1.0\n").unwrap_err();
    assert_eq!(err.0.len(), 1);
    assert_eq!(err.0[0].key, "model.a");
    assert!(err.0[0].message.contains("-0.25"), "{}", err.0[0].message);
}

#[test]
fn unknown_key_is_named() {
    let err = parse_config("grid.rmin = 0.1\n").unwrap_err();
    assert_eq!(err.0[0].key, "grid.rmin");
    assert!(err.to_string().contains("grid.rmin"));
}

#[test]
fn all_errors_are_collected() {
    let text = "grid.rmin = 1\nmodel.a = -1\nintegrator.dt = -1\nintegrator.scheme = euler\nthis line is junk\n";
    let err = parse_config(text).unwrap_err();
    let keys: Vec<&str> = err.0.iter().map(|e| e.key.as_str()).collect();
    for k in ["grid.rmin", "model.a", "integrator.dt", "integrator.scheme", "line 5"] {
        assert!(keys.contains(&k), "{k} missing from {keys:?}");
    }
}

#[test]
fn comments_blank_lines_and_whitespace() {
    let cfg = parse_config("# header\n\n  model.a=0.5   # trailing\n").unwrap();
    assert_eq!(cfg.params.a, 0.5);
}

#[test]
fn overrides_apply_after_the_file() {
    let cfg = config::load(Some("model.a = 0.5\n"), &["model.a=-0.2".into(), "seed=7".into()]).unwrap();
    assert_eq!(cfg.params.a, -0.2);
    assert_eq!(cfg.seed, 7);
    let err = config::load(None, &["nonsense".into(), "grid.nn=3".into()]).unwrap_err();
    assert_eq!(err.0.len(), 2);
}

#[test]
fn range_violations_report_the_bound() {
    let err = parse_config("grid.n = 2\ngrid.r_max = 0\nintegrator.stride = 0\n").unwrap_err();
    let msgs: Vec<String> = err.0.iter().map(|e| e.to_string()).collect();
    assert!(msgs.iter().any(|m| m.starts_with("grid.n") && m.contains(">= 8")), "{msgs:?}");
    assert!(msgs.iter().any(|m| m.starts_with("grid.r_max") && m.contains("> 0")));
    assert!(msgs.iter().any(|m| m.starts_with("integrator.stride")));
}

#[test]
fn profiles_and_windows() {
    let cfg = parse_config(
        "initial.profile = pseudo-conformal\ninitial.t_star = 2\ninitial.t0 = 0.5\ninitial.omega = 3\n\
         concentration.windows = 1.5, sqrt\nconcentration.t_star = 2\n",
    )
    .unwrap();
    assert_eq!(cfg.initial.profile, Profile::PseudoConformal { t_star: 2.0, theta: 0.0, t0: 0.5, omega: 3.0 });
    assert_eq!(cfg.windows, vec![Window::Fixed(1.5), Window::SqrtToBlowup { t_star: 2.0 }]);

    let err = parse_config("initial.profile = pseudo-conformal\ninitial.t0 = 1\n").unwrap_err();
    assert_eq!(err.0[0].key, "initial.t0");
    assert!(parse_config("concentration.windows = -1").is_err());
    assert!(parse_config("initial.profile = lorentzian").is_err());
    let err = parse_config("initial.profile = file\ninitial.file = /no/such/file\n").unwrap_err();
    assert_eq!(err.0[0].key, "initial.file");
}

#[test]
fn sweep_validation() {
    assert!(parse_config("scenario = sweep\n").is_err());
    assert!(parse_config("scenario = sweep\nsweep.values = 1\nsweep.key = sweep.threads\n").is_err());
    assert!(parse_config("scenario = sweep\nsweep.values = 1\nsweep.scenario = sweep\n").is_err());
    let cfg = parse_config("scenario = sweep\nsweep.values = -0.1, 0 ,0.3\n").unwrap();
    assert_eq!(cfg.sweep.values, vec!["-0.1", "0", "0.3"]);
}

#[test]
fn hash_tracks_content_not_location() {
    let a = parse_config("model.a = 0.5\n").unwrap();
    let b = parse_config("model.a = 0.5\noutput.dir = elsewhere\n").unwrap();
    let c = parse_config("model.a = 0.25\n").unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
    let d = a.with(&[("model.a", "0.25")]).unwrap();
    assert_eq!(d.hash(), c.hash());
    assert!(a.with(&[("grid.rmin", "1")]).is_err());
}
