mod common;

use proptest::prelude::*;
use solarcast::ingest::{parse_str, summary_stats, write_csv, HeaderMode, TimeSeries, Variable};

fn serialize(ts: &TimeSeries) -> String {
    let mut buf = Vec::new();
    write_csv(ts, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

/// Sort-based quantile written independently of the library.
fn oracle_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * q;
    let below = h.floor();
    let i = below as usize;
    if i + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[i] + (h - below) * (v[i + 1] - v[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(ts in common::series(40)) {
        let text = serialize(&ts);
        let back = parse_str(&text, HeaderMode::Auto, "prop").unwrap();
        prop_assert_eq!(back.records(), ts.records());
        prop_assert_eq!(back.timezone_offset_hours(), ts.timezone_offset_hours());
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn summary_is_order_free(ts in common::series(60), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = ts.records().to_vec();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = summary_stats(&ts).unwrap();
        let b = summary_stats(&TimeSeries::new(shuffled, "prop", 1)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn quantiles_match_sort_oracle(ts in common::series(200)) {
        let table = summary_stats(&ts).unwrap();
        for row in &table.rows {
            let values = ts.values(row.variable);
            prop_assert_eq!(row.count, values.len());
            for (got, q) in [(row.q25, 0.25), (row.median, 0.5), (row.q75, 0.75)] {
                let want = oracle_quantile(&values, q);
                prop_assert!(common::rel_close(got, want, 1e-12), "{} q{}: {} vs {}", row.variable, q, got, want);
            }
        }
    }
}

#[test]
fn shuffled_values_give_identical_statistics() {
    let ts = solarcast::synthetic::ibadan_like(2010, 1, 4);
    let base = summary_stats(&ts).unwrap();
    let mut rev = ts.records().to_vec();
    rev.reverse();
    let again = summary_stats(&TimeSeries::new(rev, "r", 1)).unwrap();
    assert_eq!(base, again);
    assert_eq!(base.get(Variable::Ghi).unwrap().count, 8760);
}
