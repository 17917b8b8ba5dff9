use qsdci_core::scenario::{
    load_scenario, run_scenario, save_scenario, Command, DspSection, EnergySection, ResultTable, Scenario, SweepSection,
};
use qsdci_core::Error;

fn small_dsp() -> DspSection {
    DspSection {
        symbols: 4096,
        ..DspSection::default()
    }
}

#[test]
fn toml_round_trip() {
    let mut s = Scenario {
        name: "round trip".into(),
        seed: Some(11),
        dsp: Some(small_dsp()),
        energy: Some(EnergySection::default()),
        sweep: Some(SweepSection {
            path: "fiber.length_km".into(),
            values: vec![1.0, 2.0],
            command: "skr".into(),
        }),
        ..Scenario::default()
    };
    s.calibration.target_qber = Some(0.02);
    let text = s.to_toml().unwrap();
    assert_eq!(Scenario::from_toml(&text).unwrap(), s);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    save_scenario(&s, &path).unwrap();
    assert_eq!(load_scenario(&path).unwrap(), s);
}

#[test]
fn empty_file_is_the_default_scenario() {
    assert_eq!(Scenario::from_toml("").unwrap(), Scenario::default());
}

#[test]
fn unknown_keys_are_rejected() {
    let err = Scenario::from_toml("[fiber]\nfibre_lenght = 3.5\n").unwrap_err();
    assert!(err.to_string().contains("fibre_lenght"), "{err}");
    assert!(Scenario::from_toml("colour = 1\n").is_err());
    assert!(Scenario::from_toml("[dsp.impairments]\nsnr = 3\n").is_err());
    assert!(Scenario::from_toml("[detector]\neficiency = 0.2\n").is_err());
}

#[test]
fn invalid_values_are_rejected() {
    let big = Scenario {
        seed: Some(u64::MAX),
        ..Scenario::default()
    };
    assert!(big.validate().unwrap_err().to_string().contains("seed"));
    assert!(Scenario::from_toml("[fiber]\nlength_km = -1\n").is_err());
    assert!(Scenario::from_toml("[decoy]\nmu = -0.5\n").is_err());
    let sweep = "[sweep]\npath = \"fiber.nope\"\nvalues = [1]\ncommand = \"skr\"\n";
    assert!(Scenario::from_toml(sweep).is_err());
}

#[test]
fn every_command_runs_on_the_default_scenario() {
    let s = Scenario {
        seed: Some(3),
        dsp: Some(small_dsp()),
        sweep: Some(SweepSection {
            path: "fiber.length_km".into(),
            values: vec![3.5, 10.0],
            command: "skr".into(),
        }),
        ..Scenario::default()
    };
    for c in Command::ALL {
        let t = run_scenario(&s, c).unwrap_or_else(|e| panic!("{c}: {e}"));
        assert!(!t.rows.is_empty(), "{c}");
        assert_eq!(t.get_meta("command"), Some(c.name()));
        assert_eq!(t.get_meta("seed"), Some("3"));
        for k in ["tool", "scenario", "filter_bw_nm", "insertion_loss_db", "e_misalign"] {
            assert!(t.get_meta(k).is_some(), "{c} lacks {k}");
        }
        let back = ResultTable::read_csv(&mut t.to_csv_string().unwrap().as_bytes()).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.metadata, t.metadata);
    }
}

#[test]
fn command_names_parse() {
    for c in Command::ALL {
        assert_eq!(c.name().parse::<Command>().unwrap(), c);
    }
    assert!("nosie".parse::<Command>().is_err());
}

#[test]
fn dsp_needs_a_seed() {
    let s = Scenario {
        dsp: Some(small_dsp()),
        ..Scenario::default()
    };
    let err = run_scenario(&s, Command::Dsp).unwrap_err();
    assert!(err.to_string().contains("seed"), "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let s = Scenario {
        seed: Some(9),
        dsp: Some(small_dsp()),
        ..Scenario::default()
    };
    for c in [Command::Dsp, Command::Skr, Command::Energy] {
        let a = run_scenario(&s, c).unwrap().to_csv_string().unwrap();
        let b = run_scenario(&s, c).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b, "{c}");
    }
    let other = Scenario {
        seed: Some(10),
        ..s.clone()
    };
    assert_ne!(
        run_scenario(&s, Command::Dsp).unwrap().rows,
        run_scenario(&other, Command::Dsp).unwrap().rows
    );
}

#[test]
fn sweep_rows_match_single_runs_in_order() {
    let values = vec![50.0, 3.5, 25.0, 100.0];
    let s = Scenario {
        sweep: Some(SweepSection {
            path: "fiber.length_km".into(),
            values: values.clone(),
            command: "skr".into(),
        }),
        ..Scenario::default()
    };
    let t = run_scenario(&s, Command::Sweep).unwrap();
    assert_eq!(t.columns[0], "fiber.length_km");
    assert_eq!(t.rows.len(), values.len());
    for (row, &v) in t.rows.iter().zip(&values) {
        assert_eq!(row[0].as_f64(), Some(v));
        let mut single = s.clone();
        single.sweep = None;
        single.fiber.length_km = v;
        let r = run_scenario(&single, Command::Skr).unwrap();
        assert_eq!(&row[1..], &r.rows[0][..]);
    }
}

#[test]
fn sweep_errors_name_the_point() {
    let s = Scenario {
        sweep: Some(SweepSection {
            path: "decoy.mu".into(),
            values: vec![0.5, -1.0],
            command: "skr".into(),
        }),
        ..Scenario::default()
    };
    let err = run_scenario(&s, Command::Sweep).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("decoy.mu=-1"), "{msg}");
    assert!(
        matches!(err.root(), Error::Invalid { .. } | Error::Parameter(_)),
        "{msg}"
    );
}

#[test]
fn filter_fit_is_recorded() {
    let mut s = Scenario::default();
    s.calibration.filter_target_dbm = Some(-115.0);
    let t = run_scenario(&s, Command::Noise).unwrap();
    assert!(t.get_meta("filter_fit_total_dbm").is_some());
    let bw: f64 = t.get_meta("filter_bw_nm").unwrap().parse().unwrap();
    assert!((0.1..=2.0).contains(&bw));
}

#[test]
fn distance_sweep_falls_monotonically() {
    let p: std::path::PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "scenarios",
        "distance_sweep.toml",
    ]
    .iter()
    .collect();
    let t = run_scenario(&load_scenario(p).unwrap(), Command::Sweep).unwrap();
    let d: Vec<f64> = t
        .column("distance_km")
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect();
    assert_eq!(d, [3.5, 50.0, 100.0, 150.0]);
    let skr: Vec<f64> = t
        .column("skr_bps")
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect();
    assert!(skr.windows(2).all(|w| w[1] <= w[0]), "{skr:?}");
    assert!(skr[0] > skr[3]);
}

proptest::proptest! {
    #[test]
    fn generated_scenarios_round_trip(
        seed in proptest::option::of(0u64..=i64::MAX as u64),
        length in 0.1f64..200.0,
        mu in 0.2f64..0.9,
        nu_frac in 0.05f64..0.9,
        data_dbm in -20.0f64..5.0,
        launches in proptest::collection::vec(-20.0f64..15.0, 0..5),
        symbols in 1024usize..65536,
        snr in proptest::option::of(5.0f64..30.0),
        lanes in proptest::collection::vec(1u32..16, 1..5),
        sweep in proptest::bool::ANY,
    ) {
        let mut s = Scenario { name: format!("gen {length}"), seed, ..Scenario::default() };
        s.fiber.length_km = length;
        s.decoy.mu = mu;
        s.decoy.nu = mu * nu_frac;
        for c in s.plan.carriers.iter_mut().skip(2) {
            c.power_dbm = data_dbm;
        }
        s.noise.launch_dbm = launches;
        let mut dsp = small_dsp();
        dsp.symbols = symbols;
        dsp.impairments.snr_db = snr;
        s.dsp = Some(dsp);
        s.energy = Some(EnergySection { lanes, ..EnergySection::default() });
        if sweep {
            s.sweep = Some(SweepSection { path: "decoy.mu".into(), values: vec![mu, mu * 1.1], command: "skr".into() });
        }
        let text = s.to_toml().unwrap();
        let back = Scenario::from_toml(&text).unwrap();
        proptest::prop_assert_eq!(&back, &s);
        proptest::prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}
