//! Timestamp metrics: accuracy within a tolerance and mean absolute deviation,
//! pooled or stratified by event count or time range.
//!
//! Predictions and truths are matched index-wise after sorting both ascending.
//! All arithmetic is in seconds.

use std::fmt::Write as _;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Slack added to every tolerance comparison so that errors of exactly one
/// tolerance, computed in floating point, still count as hits.
const TOLERANCE_SLACK_S: f64 = 1e-9;

/// Event-count bucket edges (inclusive lower bounds) for transcript-length strata.
pub const EVENT_COUNT_BUCKETS: [(usize, Option<usize>); 6] = [
    (1, Some(5)),
    (6, Some(10)),
    (11, Some(15)),
    (16, Some(20)),
    (21, Some(25)),
    (26, None),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredExample {
    pub id: String,
    pub predicted_s: Vec<f64>,
    pub truth_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    #[serde(serialize_with = "tolerance_map")]
    pub accuracy_by_tolerance: Vec<(f64, f64)>,
    pub mad_s: f64,
    pub n_events: usize,
    pub n_examples: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", serialize_with = "strata_map")]
    pub strata: Vec<(String, MetricReport)>,
}

fn tolerance_map<S: Serializer>(v: &[(f64, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(v.len()))?;
    for (tol, acc) in v {
        map.serialize_entry(&format!("{tol}"), acc)?;
    }
    map.end()
}

fn strata_map<S: Serializer>(
    v: &[(String, MetricReport)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(v.len()))?;
    for (name, report) in v {
        map.serialize_entry(name, report)?;
    }
    map.end()
}

impl MetricReport {
    pub fn accuracy_at(&self, tolerance_s: f64) -> Option<f64> {
        self.accuracy_by_tolerance
            .iter()
            .find(|(t, _)| *t == tolerance_s)
            .map(|(_, a)| *a)
    }

    pub fn stratum(&self, name: &str) -> Option<&MetricReport> {
        self.strata.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table: one row for the pooled totals, then one per stratum.
    pub fn to_table(&self) -> String {
        let rows = self.rows();
        let mut header = vec!["bucket".to_string(), "examples".into(), "events".into()];
        header.extend(
            self.accuracy_by_tolerance
                .iter()
                .map(|(t, _)| format!("acc@{}ms", t * 1000.0)),
        );
        header.push("mad_s".into());
        let mut widths: Vec<usize> = header.iter().map(String::len).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let fmt_row = |cells: &[String], out: &mut String| {
            let line: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        };
        fmt_row(&header, &mut out);
        for r in &rows {
            fmt_row(r, &mut out);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket,examples,events");
        for (t, _) in &self.accuracy_by_tolerance {
            let _ = write!(out, ",acc@{t}");
        }
        out.push_str(",mad_s\n");
        for r in self.rows() {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let row = |name: &str, r: &MetricReport| {
            let mut cells = vec![
                name.to_string(),
                r.n_examples.to_string(),
                r.n_events.to_string(),
            ];
            cells.extend(
                r.accuracy_by_tolerance
                    .iter()
                    .map(|(_, a)| format!("{a:.4}")),
            );
            cells.push(format!("{:.4}", r.mad_s));
            cells
        };
        let mut rows = vec![row("all", self)];
        rows.extend(self.strata.iter().map(|(n, r)| row(n, r)));
        rows
    }
}

fn validate_tolerances(tolerances_s: &[f64]) -> Result<Vec<f64>> {
    if tolerances_s.is_empty() {
        return Err(Error::Evaluation(
            "at least one tolerance is required".into(),
        ));
    }
    if let Some(t) = tolerances_s.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Evaluation(format!("invalid tolerance {t}")));
    }
    Ok(tolerances_s.to_vec())
}

/// Pooled metrics over all matched prediction/truth pairs.
pub fn score(examples: &[ScoredExample], tolerances_s: &[f64]) -> Result<MetricReport> {
    let tolerances = validate_tolerances(tolerances_s)?;
    let mut errors = Vec::new();
    for ex in examples {
        if ex.predicted_s.len() != ex.truth_s.len() {
            return Err(Error::Evaluation(format!(
                "example {}: {} predictions for {} true timestamps",
                ex.id,
                ex.predicted_s.len(),
                ex.truth_s.len()
            )));
        }
        let mut pred = ex.predicted_s.clone();
        let mut truth = ex.truth_s.clone();
        pred.sort_by(f64::total_cmp);
        truth.sort_by(f64::total_cmp);
        errors.extend(pred.iter().zip(&truth).map(|(p, t)| (p - t).abs()));
    }
    let n = errors.len();
    let accuracy_by_tolerance = tolerances
        .iter()
        .map(|&tol| {
            let hits = errors
                .iter()
                .filter(|&&e| e <= tol + TOLERANCE_SLACK_S)
                .count();
            let acc = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
            (tol, acc)
        })
        .collect();
    let mad_s = if n == 0 {
        0.0
    } else {
        errors.iter().sum::<f64>() / n as f64
    };
    Ok(MetricReport {
        accuracy_by_tolerance,
        mad_s,
        n_events: n,
        n_examples: examples.len(),
        strata: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BucketRule {
    /// Buckets by number of true events per example.
    EventCount(Vec<(usize, Option<usize>)>),
    /// Buckets `[edges[j], edges[j+1])` in seconds, keyed on each example's
    /// latest true timestamp; the last bucket is closed on the right.
    TimeRange(Vec<f64>),
}

impl BucketRule {
    pub fn event_count_default() -> Self {
        BucketRule::EventCount(EVENT_COUNT_BUCKETS.to_vec())
    }

    fn labels(&self) -> Vec<String> {
        match self {
            BucketRule::EventCount(b) => b
                .iter()
                .map(|(lo, hi)| match hi {
                    Some(hi) => format!("{lo}-{hi}"),
                    None => format!("{lo}+"),
                })
                .collect(),
            BucketRule::TimeRange(edges) => edges
                .windows(2)
                .map(|w| format!("{}-{}s", w[0], w[1]))
                .collect(),
        }
    }

    fn bucket_of(&self, ex: &ScoredExample) -> Option<usize> {
        match self {
            BucketRule::EventCount(b) => {
                let n = ex.truth_s.len();
                b.iter()
                    .position(|(lo, hi)| n >= *lo && hi.is_none_or(|h| n <= h))
            }
            BucketRule::TimeRange(edges) => {
                let last = ex.truth_s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let k = edges.len().checked_sub(1)?;
                (0..k).find(|&j| {
                    last >= edges[j] && (last < edges[j + 1] || (j + 1 == k && last <= edges[k]))
                })
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let BucketRule::TimeRange(edges) = self {
            if edges.len() < 2
                || edges
                    .windows(2)
                    .any(|w| w[0] >= w[1] || w.iter().any(|e| e.is_nan()))
            {
                return Err(Error::Evaluation(
                    "time-range buckets need at least two increasing edges".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Pooled report with one stratum per bucket. Examples that fall in no bucket
/// go to an `other` stratum so stratum counts always sum to the total.
pub fn stratify(
    examples: &[ScoredExample],
    tolerances_s: &[f64],
    rule: &BucketRule,
) -> Result<MetricReport> {
    rule.validate()?;
    let mut pooled = score(examples, tolerances_s)?;
    let labels = rule.labels();
    let mut groups: Vec<Vec<ScoredExample>> = vec![Vec::new(); labels.len() + 1];
    for ex in examples {
        let slot = rule.bucket_of(ex).unwrap_or(labels.len());
        groups[slot].push(ex.clone());
    }
    for (j, group) in groups.iter().enumerate() {
        let name = labels
            .get(j)
            .cloned()
            .unwrap_or_else(|| "other".to_string());
        if j == labels.len() && group.is_empty() {
            continue;
        }
        pooled.strata.push((name, score(group, tolerances_s)?));
    }
    Ok(pooled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ex(id: &str, pred: &[f64], truth: &[f64]) -> ScoredExample {
        ScoredExample {
            id: id.into(),
            predicted_s: pred.to_vec(),
            truth_s: truth.to_vec(),
        }
    }

    #[test]
    fn two_pair_example() {
        let r = score(&[ex("a", &[1.00, 2.00], &[1.05, 2.50])], &[0.1]).unwrap();
        assert_eq!(r.accuracy_at(0.1), Some(0.5));
        assert_relative_eq!(r.mad_s, 0.275, epsilon = 1e-12);
        assert_eq!(r.n_events, 2);
    }

    #[test]
    fn identical_predictions_are_perfect() {
        let items = [ex("a", &[0.3, 1.2], &[0.3, 1.2]), ex("b", &[4.0], &[4.0])];
        let r = score(&items, &[0.02, 0.04, 0.1]).unwrap();
        assert!(r.accuracy_by_tolerance.iter().all(|(_, a)| *a == 1.0));
        assert_eq!(r.mad_s, 0.0);
    }

    #[test]
    fn matching_sorts_both_sides() {
        let r = score(&[ex("a", &[2.0, 1.0], &[1.0, 2.0])], &[0.0]).unwrap();
        assert_eq!(r.accuracy_at(0.0), Some(1.0));
    }

    #[test]
    fn count_mismatch_names_example() {
        let err = score(&[ex("clip-7", &[1.0], &[1.0, 2.0])], &[0.1]).unwrap_err();
        assert!(err.to_string().contains("clip-7"));
    }

    #[test]
    fn table3_bucket_edges() {
        let rule = BucketRule::event_count_default();
        assert_eq!(
            rule.labels(),
            vec!["1-5", "6-10", "11-15", "16-20", "21-25", "26+"]
        );
        let mk = |n: usize| ex("x", &vec![0.0; n], &vec![0.0; n]);
        let idx = |n: usize| rule.bucket_of(&mk(n));
        assert_eq!(idx(1), Some(0));
        assert_eq!(idx(5), Some(0));
        assert_eq!(idx(6), Some(1));
        assert_eq!(idx(25), Some(4));
        assert_eq!(idx(26), Some(5));
        assert_eq!(idx(300), Some(5));
    }

    #[test]
    fn single_bucket_equals_pooled() {
        let items = [ex("a", &[1.0, 2.0], &[1.01, 2.2]), ex("b", &[3.0], &[3.05])];
        let r = stratify(&items, &[0.04, 0.1], &BucketRule::event_count_default()).unwrap();
        let s = r.stratum("1-5").unwrap();
        assert_eq!(s.accuracy_by_tolerance, r.accuracy_by_tolerance);
        assert_eq!(s.mad_s, r.mad_s);
        assert!(r.stratum("other").is_none());
    }

    #[test]
    fn time_buckets_partition() {
        let items = [
            ex("a", &[1.0], &[1.0]),
            ex("b", &[3.9], &[3.99]),
            ex("c", &[4.0], &[4.0]),
            ex("d", &[7.5, 1.0], &[7.6, 1.0]),
            ex("e", &[8.0], &[8.0]),
        ];
        let r = stratify(&items, &[0.1], &BucketRule::TimeRange(vec![0.0, 4.0, 8.0])).unwrap();
        let counts: Vec<usize> = r.strata.iter().map(|(_, s)| s.n_examples).collect();
        assert_eq!(counts, vec![2, 3]);
        assert_eq!(counts.iter().sum::<usize>(), r.n_examples);
    }

    #[test]
    fn renderers_include_every_stratum() {
        let items = [ex("a", &[1.0], &[1.0]), ex("b", &[0.5; 7], &[0.5; 7])];
        let r = stratify(&items, &[0.02, 0.04], &BucketRule::event_count_default()).unwrap();
        let table = r.to_table();
        assert!(table.lines().count() == 8 && table.contains("26+"));
        let csv = r.to_csv();
        assert!(csv.starts_with("bucket,examples,events,acc@0.02,acc@0.04,mad_s\n"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["accuracy_by_tolerance"]["0.04"], 1.0);
        assert_eq!(json["strata"]["6-10"]["n_examples"], 1);
    }

    fn examples_strategy() -> impl Strategy<Value = Vec<ScoredExample>> {
        prop::collection::vec(
            prop::collection::vec((0.0f64..30.0, -0.2f64..0.2), 1..30),
            1..20,
        )
        .prop_map(|exs| {
            exs.into_iter()
                .enumerate()
                .map(|(i, pairs)| ScoredExample {
                    id: format!("e{i}"),
                    truth_s: pairs.iter().map(|p| p.0).collect(),
                    predicted_s: pairs.iter().map(|p| p.0 + p.1).collect(),
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn pooled_mad_is_weighted_mean_of_strata(items in examples_strategy()) {
            let r = stratify(&items, &[0.02, 0.04, 0.1], &BucketRule::event_count_default()).unwrap();
            let weighted: f64 = r.strata.iter().map(|(_, s)| s.mad_s * s.n_events as f64).sum::<f64>()
                / r.n_events as f64;
            prop_assert!((weighted - r.mad_s).abs() < 1e-12);
            for (_, s) in std::iter::once(&("all".to_string(), r.clone())).chain(r.strata.iter()) {
                let accs: Vec<f64> = s.accuracy_by_tolerance.iter().map(|x| x.1).collect();
                prop_assert!(accs.windows(2).all(|w| w[0] <= w[1]));
            }
        }

        #[test]
        fn score_is_permutation_invariant(items in examples_strategy(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled = items.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = score(&items, &[0.04]).unwrap();
            let b = score(&shuffled, &[0.04]).unwrap();
            prop_assert_eq!(a.accuracy_by_tolerance, b.accuracy_by_tolerance);
            prop_assert!((a.mad_s - b.mad_s).abs() < 1e-12);
        }
    }
}
