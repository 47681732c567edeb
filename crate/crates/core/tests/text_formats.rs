use disperse::config::RunConfig;
use disperse::field::parse_field_csv;
use disperse::table::Table;
use disperse::{make_grid, Descriptor, WaveField, C64};
use proptest::prelude::*;

fn descriptor() -> impl Strategy<Value = Descriptor> {
    prop_oneof![
        Just(Descriptor::Zero),
        (0.01f64..10.0, 0.1f64..3.0).prop_map(|(v0, sigma)| Descriptor::GaussianBarrier { v0, sigma }),
        (0.1f64..2.0).prop_map(|kappa| Descriptor::SolitonWell { kappa }),
        (0.01f64..10.0, 0.1f64..3.0).prop_map(|(v0, a)| Descriptor::SquareBarrier { v0, a }),
    ]
}

proptest! {
    #[test]
    fn descriptor_text_round_trips(d in descriptor()) {
        prop_assert_eq!(d.to_string().parse::<Descriptor>().unwrap(), d);
    }

    #[test]
    fn config_round_trips(d in descriptor(), lambda in prop_oneof![Just(-1.0f64), Just(1.0f64)], p in 3.01f64..6.0, points in 4usize..12) {
        let mut c = RunConfig { potential: d, ..RunConfig::default() };
        c.grid.points = 1 << points;
        c.decay.lambda = lambda;
        c.decay.p = p;
        let back: RunConfig = c.to_toml().parse().unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn field_csv_is_exact(values in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 16)) {
        let grid = make_grid(4.0, 16).unwrap();
        let u = WaveField::new(&grid, values.iter().map(|(a, b)| C64::new(*a, *b)).collect(), 2.5).unwrap();
        let text = u.to_csv(&grid);
        prop_assert_eq!(WaveField::from_csv(&grid, &text, 2.5).unwrap(), u);
        prop_assert_eq!(parse_field_csv(&text).unwrap().len(), 16);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = text.parse::<RunConfig>();
        let _ = text.parse::<Descriptor>();
        let _ = parse_field_csv(&text);
        let _ = Table::parse(&text);
    }
}

/// Replays the fuzz seeds through the same round trips the fuzz targets check.
#[test]
fn fuzz_seeds_round_trip() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let read = |target: &str| -> Vec<String> {
        let mut files: Vec<_> = std::fs::read_dir(root.join(target)).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect()
    };
    let configs = read("config");
    assert!(configs.iter().filter(|t| t.parse::<RunConfig>().is_ok()).count() >= 2);
    for text in &configs {
        if let Ok(c) = text.parse::<RunConfig>() {
            assert_eq!(c.to_toml().parse::<RunConfig>().unwrap(), c);
        }
    }
    for text in read("descriptor") {
        let d: Descriptor = text.parse().unwrap();
        assert_eq!(d.to_string().parse::<Descriptor>().unwrap(), d);
    }
    let fields = read("field_csv");
    assert!(fields.iter().any(|t| parse_field_csv(t).is_ok()));
    assert!(fields.iter().any(|t| parse_field_csv(t).is_err()));
}
