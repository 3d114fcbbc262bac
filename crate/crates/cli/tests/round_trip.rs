//! Serialization round trips on random inputs.

use minima_forge::pwl::PiecewisePath;
use minima_forge::rational::{rat, Rational};
use minima_forge_cli::config::{Experiment, ExperimentConfig, Format, OutputSpec, RateParams};
use minima_forge_cli::document::TemplateDocument;
use minima_forge_cli::table::Table;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..=1000, 1i64..=97).prop_map(|(p, q)| rat(p, q))
}

fn path() -> impl Strategy<Value = (usize, usize, PiecewisePath)> {
    (1usize..=3, 1usize..=3, 1usize..=4, any::<bool>()).prop_flat_map(|(m, n, segs, bounded)| {
        let d = m + n;
        (
            prop::collection::vec(1i64..=9, segs),
            prop::collection::vec(rational(), d),
            prop::collection::vec(prop::collection::vec(rational(), d), segs),
            rational(),
        )
            .prop_map(move |(steps, init, slopes, start)| {
                let mut knots = Vec::new();
                let mut t = start.clone();
                for s in &steps {
                    t += rat(*s, 4);
                    knots.push(t.clone());
                }
                let end = knots.pop();
                let end = if bounded { end } else { None };
                (m, n, PiecewisePath::new(start, knots, end, init, slopes).unwrap())
            })
    })
}

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![
        rational().prop_map(|r| minima_forge::rational::format_rational(&r)),
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(|x| x.to_string()),
        "[a-z ,\"]{0,8}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn template_document_round_trip((m, n, p) in path()) {
        let doc = TemplateDocument::from_path(m, n, &p, None);
        let back = TemplateDocument::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.path().unwrap(), p);
    }

    #[test]
    fn table_round_trip(rows in prop::collection::vec(prop::collection::vec(cell(), 3), 1..6), raw in any::<bool>()) {
        let config = ExperimentConfig {
            experiment: Experiment::TemplateRate(RateParams {
                template: "t.json".into(),
                at: "1/2".into(),
                bounds: None,
                raw,
            }),
            output: OutputSpec { path: Some("out.csv".into()), format: Format::Csv },
        };
        let mut table = Table::new(config, vec!["a".into(), "b".into(), "c".into()]);
        for r in rows {
            table.push(r);
        }
        table.trailer("note", serde_json::json!({"x": "1/3"}));
        prop_assert_eq!(Table::from_csv(&table.to_csv()).unwrap(), table);
    }
}
