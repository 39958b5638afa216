use std::fmt::Write as _;

use serde::Serialize;

use qsw_core::discrimination::Bound;
use qsw_core::{SchemeId, SweepRecord};

pub const SWEEP_HEADER: &str = "scheme,p,tau,pc,evaluations,restarts_used,seed";
pub const BOUNDS_HEADER: &str = "ensemble,n_states,dim,method,bound";

/// Formats `x` with 12 significant digits. Non-finite values print as `NaN`,
/// `inf` or `-inf`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme,
            format_sig(r.p),
            format_sig(r.tau),
            format_sig(r.pc),
            r.evaluations,
            r.restarts_used,
            r.seed
        );
    }
    out
}

pub fn bounds_csv(label: &str, n_states: usize, dim: usize, bound: &Bound) -> String {
    format!(
        "{BOUNDS_HEADER}\n{},{},{},{},{}\n",
        label.replace(',', ";"),
        n_states,
        dim,
        method_name(bound),
        format_sig(bound.value)
    )
}

pub fn method_name(bound: &Bound) -> &'static str {
    use qsw_core::discrimination::BoundMethod;
    match bound.method {
        BoundMethod::Helstrom => "helstrom",
        BoundMethod::CommonEigenbasis => "common-eigenbasis",
        BoundMethod::SquareRoot => "square-root",
    }
}

#[derive(Debug, Serialize)]
struct ThetaEntry<'a> {
    scheme: SchemeId,
    p: f64,
    tau: f64,
    pc: Option<f64>,
    theta: &'a [f64],
    error: Option<&'a str>,
}

/// Optimized parameters for every grid point, as pretty-printed JSON.
pub fn thetas_json(records: &[SweepRecord]) -> String {
    let entries: Vec<ThetaEntry<'_>> = records
        .iter()
        .map(|r| ThetaEntry {
            scheme: r.scheme,
            p: r.p,
            tau: r.tau,
            pc: r.pc.is_finite().then_some(r.pc),
            theta: &r.theta,
            error: r.error.as_deref(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&entries).expect("theta entries serialize");
    s.push('\n');
    s
}
