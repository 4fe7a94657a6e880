//! One line per acceptance criterion; exits nonzero if any criterion fails.

mod common;

use motivic_ext::fixtures::{builtin_text, parse_fixture, verify};
use motivic_ext::modules::SES_FAMILIES;
use motivic_ext::products::Ring;
use std::time::Instant;

const FIXTURE_CRITERIA: [(u32, &str, &str); 10] = [
    (1, "ext_M2", "Ext ring of the point"),
    (2, "R", "Ext of R"),
    (3, "DQinf", "Ext of DQ(inf)"),
    (4, "dq16", "Ext of DQ(16)"),
    (5, "dq2", "Ext of DQ(2)"),
    (6, "dq14", "Ext of DQ(14)"),
    (7, "dq17", "Ext of DQ(17)"),
    (8, "split15", "splitting of Ext(DQ(15))"),
    (9, "KO", "HFPSS for KO"),
    (10, "kgl", "HFPSS for kgl"),
];

fn fixture_line(n: u32, name: &str, what: &str) -> (bool, String) {
    let start = Instant::now();
    let f = match parse_fixture(builtin_text(name).expect("embedded")) {
        Ok(f) => f,
        Err(e) => return (false, format!("criterion {n:>2}: FAIL {what}: {e}")),
    };
    let r = verify(&f);
    let secs = start.elapsed().as_secs_f64();
    if r.ok() {
        (
            true,
            format!("criterion {n:>2}: PASS {what} ({} checks, {secs:.2}s)", r.checks.len()),
        )
    } else {
        let first: Vec<String> = r.failures().iter().take(3).map(|c| c.what.clone()).collect();
        (false, format!("criterion {n:>2}: FAIL {what}: {}", first.join(" | ")))
    }
}

fn property_suite() -> Result<String, String> {
    let mut counts = [0usize; 5];
    for name in common::MODULES {
        counts[0] += common::resolution_checks(name)?;
        counts[1] += common::enlargement(name)?;
        counts[2] += common::classical(name)?;
    }
    for (fam, n) in SES_FAMILIES {
        counts[3] += common::les(fam, n)?;
    }
    let ring = Ring::new(common::S, common::T + 2).map_err(|e| e.to_string())?;
    for name in ["M2", "DQ(2)", "DQ(14)", "DQ(17)", "R"] {
        counts[4] += common::associativity(&ring, name)?;
    }
    Ok(format!(
        "{} modules; {} resolution checks, {} stable cells, {} classical cells, {} LES slices, {} associativity checks",
        common::MODULES.len(),
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        counts[4]
    ))
}

fn main() -> std::process::ExitCode {
    let mut lines = Vec::new();
    let mut all = true;
    for (n, name, what) in FIXTURE_CRITERIA {
        let (ok, line) = fixture_line(n, name, what);
        all &= ok;
        lines.push(line);
    }
    let start = Instant::now();
    match property_suite() {
        Ok(s) => lines.push(format!(
            "criterion 11: PASS property suites: {s} ({:.2}s)",
            start.elapsed().as_secs_f64()
        )),
        Err(e) => {
            all = false;
            lines.push(format!("criterion 11: FAIL property suites: {e}"));
        }
    }
    for l in &lines {
        println!("{l}");
    }
    if all {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("some acceptance criteria failed");
        std::process::ExitCode::FAILURE
    }
}
