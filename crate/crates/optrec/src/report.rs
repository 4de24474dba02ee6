//! Canonical JSON reports.
//!
//! Reports are emitted by hand rather than through a serializer so the
//! byte layout is fully pinned down: keys appear in a fixed order, floats
//! are printed with 17 significant digits (`{:.16e}`), which round-trips
//! every finite `f64` exactly, and negative zero is normalized. The same
//! canonical float syntax feeds the instance digest, so a digest identifies
//! the numerical content of an instance, not its formatting.

use crate::error::{Error, Result};
use crate::global::GlobalSolution;
use crate::linalg::Mat;
use crate::local::{Certificate, LocalSolution};
use crate::model::ProblemInstance;
use crate::oracle::OracleReport;

/// 17-significant-digit scientific notation; exact `f64` round-trip.
pub(crate) fn fmt_float(v: f64) -> String {
    debug_assert!(v.is_finite(), "reports must not contain {v}");
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn float_array(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| fmt_float(x)).collect();
    format!("[{}]", items.join(","))
}

/// Matrix as an array of row arrays.
fn float_matrix(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.rows()).map(|i| float_array(m.row(i))).collect();
    format!("[{}]", rows.join(","))
}

/// Matrix as an array of column arrays (the instance layout of `v_basis`).
fn float_matrix_cols(m: &Mat) -> String {
    let cols: Vec<String> = (0..m.cols()).map(|j| float_array(&m.col(j))).collect();
    format!("[{}]", cols.join(","))
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// The instance with alphabetical keys and canonical floats; the digest
/// input.
pub fn canonical_instance_json(p: &ProblemInstance) -> String {
    format!(
        "{{\"epsilon\":{},\"eta\":{},\"lambda\":{},\"v_basis\":{},\"y\":{}}}",
        fmt_float(p.epsilon),
        fmt_float(p.eta),
        float_matrix(&p.lambda),
        float_matrix_cols(&p.v_basis),
        float_array(&p.y),
    )
}

/// 16-hex-digit FNV-1a digest of the canonical instance JSON.
pub fn instance_digest(p: &ProblemInstance) -> String {
    format!("{:016x}", fnv1a64(canonical_instance_json(p).as_bytes()))
}

/// What a solve produced; the variants match the CLI subcommands.
#[derive(Clone, Debug)]
pub enum Payload {
    Local {
        route: &'static str,
        tau: f64,
        center: Vec<f64>,
        radius: f64,
        certificate: Option<Certificate>,
    },
    Global {
        route: &'static str,
        tau: f64,
        map: Mat,
        lb: f64,
        c: f64,
        d: f64,
    },
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub instance_digest: String,
    pub payload: Payload,
    pub oracle: Option<OracleReport>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    /// Fixed key order: instance_digest, route, tau, center|map, radius|lb,
    /// certificate, oracle, warnings.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(512);
        out.push_str("{\"instance_digest\":\"");
        out.push_str(&json_escape(&self.instance_digest));
        out.push_str("\",");
        match &self.payload {
            Payload::Local {
                route,
                tau,
                center,
                radius,
                certificate,
            } => {
                out.push_str(&format!(
                    "\"route\":\"{}\",\"tau\":{},\"center\":{},\"radius\":{},",
                    route,
                    fmt_float(*tau),
                    float_array(center),
                    fmt_float(*radius),
                ));
                match certificate {
                    Some(cert) => out.push_str(&format!(
                        "\"certificate\":{{\"h\":{},\"a\":{},\"b\":{}}},",
                        float_array(&cert.h),
                        fmt_float(cert.a),
                        fmt_float(cert.b),
                    )),
                    None => out.push_str("\"certificate\":null,"),
                }
            }
            Payload::Global {
                route,
                tau,
                map,
                lb,
                c,
                d,
            } => {
                out.push_str(&format!(
                    "\"route\":\"{}\",\"tau\":{},\"map\":{},\"lb\":{},",
                    route,
                    fmt_float(*tau),
                    float_matrix(map),
                    fmt_float(*lb),
                ));
                out.push_str(&format!(
                    "\"certificate\":{{\"c\":{},\"d\":{}}},",
                    fmt_float(*c),
                    fmt_float(*d),
                ));
            }
        }
        match &self.oracle {
            Some(rep) => out.push_str(&format!(
                "\"oracle\":{{\"method\":\"{}\",\"estimate\":{},\"n_samples\":{},\"seed\":{}}},",
                rep.method.as_str(),
                fmt_float(rep.estimate),
                rep.n_samples,
                rep.seed,
            )),
            None => out.push_str("\"oracle\":null,"),
        }
        let warns: Vec<String> = self
            .warnings
            .iter()
            .map(|w| format!("\"{}\"", json_escape(w)))
            .collect();
        out.push_str(&format!("\"warnings\":[{}]}}", warns.join(",")));
        out
    }
}

pub fn local_report(
    p: &ProblemInstance,
    sol: &LocalSolution,
    oracle: Option<OracleReport>,
    warnings: Vec<String>,
) -> SolveReport {
    SolveReport {
        instance_digest: instance_digest(p),
        payload: Payload::Local {
            route: sol.route.as_str(),
            tau: sol.tau_sharp,
            center: sol.center.clone(),
            radius: sol.radius,
            certificate: sol.certificate.clone(),
        },
        oracle,
        warnings,
    }
}

pub fn global_report(
    p: &ProblemInstance,
    sol: &GlobalSolution,
    optimal_tau: bool,
    oracle: Option<OracleReport>,
    warnings: Vec<String>,
) -> SolveReport {
    SolveReport {
        instance_digest: instance_digest(p),
        payload: Payload::Global {
            route: if optimal_tau {
                "lower_bound"
            } else {
                "gwce_upper_bound"
            },
            tau: sol.tau_flat,
            map: sol.map.clone(),
            lb: sol.lb,
            c: sol.c_flat,
            d: sol.d_flat,
        },
        oracle,
        warnings,
    }
}

/// A report read back for verification.
#[derive(Clone, Debug)]
pub struct ParsedReport {
    pub instance_digest: String,
    pub route: String,
    pub tau: f64,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub map: Option<Mat>,
    pub lb: Option<f64>,
    pub certificate: Option<Certificate>,
    pub oracle_estimate: Option<f64>,
}

fn get_f64(v: &serde_json::Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(|x| x.as_f64())
        .ok_or_else(|| Error::Parse(format!("report key \"{key}\" missing or not a number")))
}

fn get_floats(v: &serde_json::Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of numbers in report".into()))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::Parse("expected a number in report array".into()))
        })
        .collect()
}

pub fn parse_report(text: &str) -> Result<ParsedReport> {
    let v: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("report is not valid JSON: {e}")))?;
    let digest = v
        .get("instance_digest")
        .and_then(|x| x.as_str())
        .ok_or_else(|| Error::Parse("report key \"instance_digest\" missing".into()))?
        .to_string();
    let route = v
        .get("route")
        .and_then(|x| x.as_str())
        .ok_or_else(|| Error::Parse("report key \"route\" missing".into()))?
        .to_string();
    let tau = get_f64(&v, "tau")?;

    let mut out = ParsedReport {
        instance_digest: digest,
        route,
        tau,
        center: None,
        radius: None,
        map: None,
        lb: None,
        certificate: None,
        oracle_estimate: None,
    };

    if let Some(c) = v.get("center") {
        out.center = Some(get_floats(c)?);
        out.radius = Some(get_f64(&v, "radius")?);
    }
    if let Some(m) = v.get("map") {
        let rows: Result<Vec<Vec<f64>>> = m
            .as_array()
            .ok_or_else(|| Error::Parse("report key \"map\" must be an array".into()))?
            .iter()
            .map(get_floats)
            .collect();
        let rows = rows?;
        if rows.is_empty() {
            return Err(Error::Parse("report key \"map\" is empty".into()));
        }
        out.map = Some(Mat::from_rows(&rows));
        out.lb = Some(get_f64(&v, "lb")?);
    }
    // Global certificates carry only the multipliers (c, d); the verifier
    // recomputes everything else, so only the local (h, a, b) form is kept.
    if let Some(h) = v.get("certificate").and_then(|cert| cert.get("h")) {
        let cert = &v["certificate"];
        out.certificate = Some(Certificate {
            h: get_floats(h)?,
            a: get_f64(cert, "a")?,
            b: get_f64(cert, "b")?,
        });
    }
    if let Some(orc) = v.get("oracle") {
        if !orc.is_null() {
            out.oracle_estimate = Some(get_f64(orc, "estimate")?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips_and_normalizes() {
        for v in [
            1.0,
            -1.0,
            0.3,
            1.9385779115930444,
            f64::MIN_POSITIVE,
            1e300,
            -2.2250738585072014e-308,
        ] {
            let s = fmt_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
        }
        assert_eq!(fmt_float(-0.0), fmt_float(0.0));
    }

    #[test]
    fn fnv_matches_reference_values() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn digest_ignores_formatting_but_not_values() {
        let a = ProblemInstance::from_json_str(
            r#"{"lambda": [[0, 1, 0], [0, 0, 1]], "v_basis": [], "epsilon": 1.0, "eta": 0.5, "y": [1, 0.3]}"#,
        )
        .unwrap();
        let b = ProblemInstance::from_json_str(
            r#"{"y":[1.0,3e-1],"eta":0.5,"epsilon":1,"v_basis":[],"lambda":[[0,1,0],[0,0,1]]}"#,
        )
        .unwrap();
        assert_eq!(instance_digest(&a), instance_digest(&b));
        let mut c = a.clone();
        c.epsilon = 1.0 + 1e-15;
        assert_ne!(instance_digest(&a), instance_digest(&c));
    }

    #[test]
    fn report_json_has_the_fixed_key_order_and_parses_back() {
        let p = ProblemInstance::from_json_str(
            r#"{"lambda": [[0,1,0],[0,0,1]], "v_basis": [], "epsilon": 1.0, "eta": 0.5, "y": [1, 0.3]}"#,
        )
        .unwrap();
        let report = SolveReport {
            instance_digest: instance_digest(&p),
            payload: Payload::Local {
                route: "ball",
                tau: 0.25,
                center: vec![0.0, 0.25, 0.075],
                radius: 0.9,
                certificate: Some(Certificate {
                    h: vec![1.0, 0.0, 0.0],
                    a: 1.0,
                    b: 3.0,
                }),
            },
            oracle: None,
            warnings: vec!["w1".into()],
        };
        let text = report.to_json();
        let idx = |needle: &str| text.find(needle).unwrap();
        assert!(idx("instance_digest") < idx("\"route\""));
        assert!(idx("\"route\"") < idx("\"tau\""));
        assert!(idx("\"tau\"") < idx("\"center\""));
        assert!(idx("\"center\"") < idx("\"radius\""));
        assert!(idx("\"radius\"") < idx("\"certificate\""));
        assert!(idx("\"certificate\"") < idx("\"oracle\""));
        assert!(idx("\"oracle\"") < idx("\"warnings\""));

        let parsed = parse_report(&text).unwrap();
        assert_eq!(parsed.route, "ball");
        assert_eq!(parsed.tau, 0.25);
        assert_eq!(parsed.center.unwrap(), vec![0.0, 0.25, 0.075]);
        assert_eq!(parsed.radius.unwrap(), 0.9);
        let cert = parsed.certificate.unwrap();
        assert_eq!(cert.a, 1.0);
        assert_eq!(cert.b, 3.0);
        assert!(parsed.oracle_estimate.is_none());

        // Valid JSON according to an independent parser.
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["warnings"][0], "w1");
    }
}
