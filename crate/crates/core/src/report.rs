//! Stable serialization of claim reports, violations, and censuses.
//!
//! Documents are versioned JSON with declaration-order (stable) keys. All
//! big integers travel as exact decimal strings; nothing in a document is
//! floating point. Generation timestamp and wall time are run metadata:
//! they live next to the payload, are excluded from document equality,
//! and never make payload bytes differ between identical runs.

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::claims::{ClaimReport, EvalPath, ExpectedRepr, ValueRepr, Violation};
use crate::scan::GiugaCensus;
use crate::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;
pub const CSV_HEADER: &str = "claim_id,n,k,observed,expected,path";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    ClaimReport(ClaimReport),
    Census(GiugaCensus),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u64,
    pub tool_version: String,
    /// Unix seconds, UTC. Excluded from equality so fixtures stay stable.
    pub generated_at_unix: u64,
    /// Run timing in milliseconds. Excluded from equality.
    pub wall_time_ms: u64,
    pub payload: Payload,
}

impl PartialEq for ReportDocument {
    fn eq(&self, other: &Self) -> bool {
        self.format_version == other.format_version
            && self.tool_version == other.tool_version
            && self.payload == other.payload
    }
}

impl Eq for ReportDocument {}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn tool_version() -> String {
    format!("hkscan-core {}", env!("CARGO_PKG_VERSION"))
}

impl ReportDocument {
    pub fn for_claim_report(report: ClaimReport) -> ReportDocument {
        let wall = report.wall_time_ms;
        ReportDocument {
            format_version: FORMAT_VERSION,
            tool_version: tool_version(),
            generated_at_unix: now_unix(),
            wall_time_ms: wall,
            payload: Payload::ClaimReport(report),
        }
    }

    pub fn for_census(census: GiugaCensus, wall_time_ms: u64) -> ReportDocument {
        ReportDocument {
            format_version: FORMAT_VERSION,
            tool_version: tool_version(),
            generated_at_unix: now_unix(),
            wall_time_ms,
            payload: Payload::Census(census),
        }
    }

    /// Deterministic bytes of the payload alone; identical runs produce
    /// identical payload bytes whatever their scheduling or timing.
    pub fn payload_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.payload).expect("payload serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    StructuredJson,
    CsvViolations,
}

pub fn to_json_string(doc: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(out: &mut String, v: &Violation) {
    let n = v.n.map(|x| x.to_string()).unwrap_or_default();
    let k = v.k.map(|x| x.to_string()).unwrap_or_default();
    out.push_str(&format!(
        "{},{},{},{},{},{}\n",
        csv_field(&v.claim),
        n,
        k,
        csv_field(&v.observed.to_string()),
        csv_field(&v.expected.to_string()),
        v.path
    ));
}

/// One violation per row. A census exports its composite satisfiers as
/// violations of the Giuga claim (a composite satisfier is exactly that).
pub fn to_csv_string(doc: &ReportDocument) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    match &doc.payload {
        Payload::ClaimReport(r) => {
            for v in &r.violations {
                csv_row(&mut out, v);
            }
        }
        Payload::Census(c) => {
            for &n in &c.composite_satisfiers {
                let v = Violation {
                    claim: "giuga".into(),
                    n: Some(n),
                    k: None,
                    observed: ValueRepr::Residue { r: n - 1, m: n },
                    expected: ExpectedRepr::NotResidue { r: n - 1, m: n },
                    path: EvalPath::Modular,
                };
                csv_row(&mut out, &v);
            }
        }
    }
    out
}

pub fn write_report(doc: &ReportDocument, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::StructuredJson => to_json_string(doc),
        ReportFormat::CsvViolations => to_csv_string(doc),
    };
    std::fs::write(path, text)?;
    Ok(())
}

fn parse_error(e: &serde_json::Error) -> Error {
    Error::ReportParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Exact inverse of [`write_report`] for the structured JSON format.
/// Unknown format versions are rejected before full parsing.
pub fn read_report(path: &Path) -> Result<ReportDocument> {
    let text = std::fs::read_to_string(path)?;
    let probe: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_error(&e))?;
    match probe.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION => {}
        Some(v) => {
            return Err(Error::VersionMismatch {
                found: v,
                supported: FORMAT_VERSION,
            })
        }
        None => {
            return Err(Error::ReportParse {
                line: 1,
                column: 1,
                message: "missing format_version field".into(),
            })
        }
    }
    let mut doc: ReportDocument = serde_json::from_str(&text).map_err(|e| parse_error(&e))?;
    // wall time is stored as document metadata; restore it to the report
    if let Payload::ClaimReport(r) = &mut doc.payload {
        r.wall_time_ms = doc.wall_time_ms;
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::{check_claim, CheckOptions, ClaimKind, KPolicy, Verdict};
    use proptest::prelude::*;

    fn sample_report() -> ClaimReport {
        check_claim("thm-ukz", 2, 30, &KPolicy::AllValid, &CheckOptions::default()).unwrap()
    }

    #[test]
    fn json_round_trip_of_a_real_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let doc = ReportDocument::for_claim_report(sample_report());
        write_report(&doc, &path, ReportFormat::StructuredJson).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back, doc);
        // metadata fields are restored verbatim even though equality skips them
        assert_eq!(back.generated_at_unix, doc.generated_at_unix);
        assert_eq!(back.wall_time_ms, doc.wall_time_ms);
    }

    #[test]
    fn violations_are_sorted_in_the_document() {
        let doc = ReportDocument::for_claim_report(sample_report());
        if let Payload::ClaimReport(r) = &doc.payload {
            let keys: Vec<(Option<u64>, Option<u64>)> =
                r.violations.iter().map(|v| (v.n, v.k)).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
        } else {
            panic!("expected a claim report payload");
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let doc = ReportDocument::for_claim_report(sample_report());
        let csv = to_csv_string(&doc);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "thm-ukz,4,2,2 (mod 4),0 (mod 4),modular");
    }

    #[test]
    fn timestamp_and_wall_time_excluded_from_equality() {
        let report = sample_report();
        let mut a = ReportDocument::for_claim_report(report.clone());
        let mut b = ReportDocument::for_claim_report(report);
        a.generated_at_unix = 1;
        b.generated_at_unix = 2;
        a.wall_time_ms = 10;
        b.wall_time_ms = 99;
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let doc = ReportDocument::for_claim_report(sample_report());
        let text = to_json_string(&doc);
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = read_report(&path).unwrap_err();
        assert!(matches!(err, Error::ReportParse { .. }));
    }

    #[test]
    fn unknown_versions_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for v in [0u64, 2, 999] {
            let path = dir.path().join(format!("v{v}.json"));
            let doc = ReportDocument::for_claim_report(sample_report());
            let text = to_json_string(&doc).replace(
                "\"format_version\": 1",
                &format!("\"format_version\": {v}"),
            );
            std::fs::write(&path, text).unwrap();
            let err = read_report(&path).unwrap_err();
            assert!(matches!(err, Error::VersionMismatch { found, .. } if found == v), "v={v}");
        }
    }

    #[test]
    fn census_document_round_trips_and_exports() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("census.json");
        let census = GiugaCensus {
            x: 100,
            prime_satisfiers: 25,
            composite_satisfiers: vec![],
            g: 0,
        };
        let doc = ReportDocument::for_census(census, 5);
        write_report(&doc, &path, ReportFormat::StructuredJson).unwrap();
        assert_eq!(read_report(&path).unwrap(), doc);
        assert_eq!(to_csv_string(&doc), format!("{CSV_HEADER}\n"));
    }

    // strategies for randomized valid documents

    fn arb_decimal() -> impl Strategy<Value = String> {
        prop_oneof![
            any::<i128>().prop_map(|v| v.to_string()),
            "-?[1-9][0-9]{20,40}".prop_map(|s| s),
        ]
    }

    fn arb_value() -> impl Strategy<Value = ValueRepr> {
        prop_oneof![
            (any::<u64>(), 2u64..(1 << 62)).prop_map(|(r, m)| ValueRepr::Residue { r: r % m, m }),
            arb_decimal().prop_map(|value| ValueRepr::Int { value }),
        ]
    }

    fn arb_expected() -> impl Strategy<Value = ExpectedRepr> {
        prop_oneof![
            (any::<u64>(), 2u64..(1 << 62))
                .prop_map(|(r, m)| ExpectedRepr::Residue { r: r % m, m }),
            (any::<u64>(), 2u64..(1 << 62))
                .prop_map(|(r, m)| ExpectedRepr::NotResidue { r: r % m, m }),
            arb_decimal().prop_map(|value| ExpectedRepr::Int { value }),
            arb_decimal().prop_map(|bound| ExpectedRepr::IntLessThan { bound }),
        ]
    }

    fn arb_violation() -> impl Strategy<Value = Violation> {
        let ids = crate::claims::list_claims();
        (
            0..ids.len(),
            proptest::option::of(2u64..1_000_000),
            proptest::option::of(1u64..1_000_000),
            arb_value(),
            arb_expected(),
            prop_oneof![Just(EvalPath::Exact), Just(EvalPath::Modular)],
        )
            .prop_map(move |(i, n, k, observed, expected, path)| Violation {
                claim: ids[i].id.to_string(),
                n,
                k,
                observed,
                expected,
                path,
            })
    }

    fn arb_policy() -> impl Strategy<Value = KPolicy> {
        prop_oneof![
            Just(KPolicy::AllValid),
            proptest::collection::vec(1u64..500, 0..5).prop_map(|ks| KPolicy::Fixed { ks }),
            proptest::collection::vec(1u64..10, 0..5)
                .prop_map(|offsets| KPolicy::NearN { offsets }),
            (
                proptest::collection::vec(1u64..500, 0..4),
                proptest::collection::vec(1u64..10, 0..4)
            )
                .prop_map(|(ks, offsets)| KPolicy::FixedAndNear { ks, offsets }),
        ]
    }

    prop_compose! {
        fn arb_claim_report()(
            idx in 0..crate::claims::list_claims().len(),
            lo in 1u64..1000,
            span in 0u64..5000,
            policy in arb_policy(),
            mut violations in proptest::collection::vec(arb_violation(), 0..6),
            extra_checked in 0u64..100_000,
            skipped in 0u64..1000,
        ) -> ClaimReport {
            let desc = &crate::claims::list_claims()[idx];
            violations.sort_by_key(|v| (v.n.unwrap_or(0), v.k.unwrap_or(0)));
            let total = violations.len() as u64;
            let verdict = if total > 0 {
                Verdict::Violated
            } else if extra_checked > 0 {
                Verdict::ConfirmedOnRange
            } else {
                Verdict::Skipped
            };
            ClaimReport {
                claim: desc.id.to_string(),
                kind: desc.kind,
                n_lo: lo,
                n_hi: lo + span,
                k_policy: policy,
                pairs_checked: extra_checked + total,
                pairs_skipped: skipped,
                total_violations: total,
                violations,
                verdict,
                wall_time_ms: 0,
            }
        }
    }

    fn arb_census() -> impl Strategy<Value = GiugaCensus> {
        (3u64..1_000_000, 0u64..80_000, proptest::collection::btree_set(4u64..1_000_000, 0..5))
            .prop_map(|(x, prime_satisfiers, comps)| {
                let composite_satisfiers: Vec<u64> = comps.into_iter().collect();
                let g = composite_satisfiers.len() as u64;
                GiugaCensus {
                    x,
                    prime_satisfiers,
                    composite_satisfiers,
                    g,
                }
            })
    }

    fn arb_document() -> impl Strategy<Value = ReportDocument> {
        let payload = prop_oneof![
            arb_claim_report().prop_map(Payload::ClaimReport),
            arb_census().prop_map(Payload::Census),
        ];
        (payload, any::<u64>(), 0u64..(1 << 40)).prop_map(|(payload, ts, wall)| ReportDocument {
            format_version: FORMAT_VERSION,
            tool_version: "hkscan-core test".into(),
            generated_at_unix: ts,
            wall_time_ms: wall,
            payload,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn randomized_documents_round_trip(doc in arb_document()) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("doc.json");
            write_report(&doc, &path, ReportFormat::StructuredJson).unwrap();
            let back = read_report(&path).unwrap();
            prop_assert_eq!(&back, &doc);
            // byte-stable: a second serialization is identical
            prop_assert_eq!(to_json_string(&back), to_json_string(&doc));
        }

        #[test]
        fn csv_always_has_the_exact_header(doc in arb_document()) {
            let csv = to_csv_string(&doc);
            prop_assert!(csv.starts_with("claim_id,n,k,observed,expected,path\n"));
        }
    }

    #[test]
    fn report_kind_survives_round_trip() {
        let doc = ReportDocument::for_claim_report(sample_report());
        let json = to_json_string(&doc);
        assert!(json.contains("\"kind\": \"claim_report\""));
        assert!(json.contains("\"under-test\""));
        let back: ReportDocument = serde_json::from_str(&json).unwrap();
        if let Payload::ClaimReport(r) = back.payload {
            assert_eq!(r.kind, ClaimKind::UnderTest);
        } else {
            panic!("wrong payload kind");
        }
    }
}
