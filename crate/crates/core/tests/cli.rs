use motivic_ext::fixtures::{builtin_names, builtin_text, parse_fixture, verify};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_motivic-ext"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn verify_ext_m2() {
    let (code, out, _) = run(&["verify", "--fixture", "ext_M2"]);
    assert_eq!(code, 0, "{out}");
    for rel in ["h0 h1 = 0", "tau h1^3 = 0", "h1 alpha = 0", "alpha^2 = h0^2 beta"] {
        assert!(out.contains(&format!("ok  : {rel}")), "{rel} missing from\n{out}");
    }
}

#[test]
fn verify_dq14_includes_beta_r11() {
    let (code, out, _) = run(&["verify", "--fixture", "dq14"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ok  : beta r11 = alpha z"));
}

#[test]
fn empty_chart_is_axes_only() {
    let (code, out, _) = run(&["chart", "--module", "builtin:M2", "--format", "ascii", "--tmax", "0"]);
    assert_eq!(code, 0);
    assert!(
        !out.lines()
            .skip(1)
            .any(|l| l.contains('*') || l.contains(" o") || l.contains('#')),
        "{out}"
    );
    assert!(out.contains("s/n"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["verify", "--fixture", "no_such_fixture"]).0, 2);
    assert_eq!(run(&["ext", "--module", "DQ(0)"]).0, 2);
    assert_eq!(run(&["chart", "--module", "M2", "--format", "pdf"]).0, 2);
    assert_eq!(run(&["hfpss", "--ring", "KU"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn basis_lists_a1() {
    let (code, out, _) = run(&["basis", "--algebra", "A1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 8);
    assert!(out.contains("Sq2Sq1Sq2 (5,2)"));
}

#[test]
fn chart_and_presentation_json() {
    let dir = std::env::temp_dir().join(format!("motivic-ext-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dq2.svg");
    let (code, _, err) = run(&[
        "chart",
        "--module",
        "DQ(2)",
        "--tmax",
        "24",
        "--format",
        "svg",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    let (code, out, _) = run(&["ext", "--module", "M2", "--tmax", "30", "--presentation", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 4);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn module_file_round_trip_through_cli() {
    let dir = std::env::temp_dir().join(format!("motivic-ext-mod-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dq2.mod");
    let m = motivic_ext::modules::builtin("DQ(2)", 30).unwrap();
    std::fs::write(&path, motivic_ext::modules::render_module(&m)).unwrap();
    let (c1, from_file, _) = run(&["ext", "--module", path.to_str().unwrap(), "--tmax", "24"]);
    let (c2, from_builtin, _) = run(&["ext", "--module", "builtin:DQ(2)", "--tmax", "24"]);
    assert_eq!((c1, c2), (0, 0));
    let body = |s: &str| s.lines().skip(1).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(body(&from_file), body(&from_builtin));
    std::fs::remove_dir_all(&dir).ok();
}

/// Every single-line mutation of a fixture value must be caught.
fn mutants(text: &str) -> Vec<(String, String)> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        let mutated: Option<String> = if l.starts_with("generator ") {
            // Shift the weight of the tridegree.
            let p = l.rfind(',').unwrap();
            let q = l[p..].find(')').unwrap() + p;
            let w = &l[p + 1..q];
            let nw = w.parse::<i32>().map_or(format!("{w}+1"), |v| (v + 1).to_string());
            Some(format!("{}{}{}", &l[..=p], nw, &l[q..]))
        } else if l.starts_with("relation ") {
            Some(if l.contains("!=") {
                l.replacen("!=", "=", 1)
            } else {
                l.replacen(" = ", " != ", 1)
            })
        } else if l.starts_with("verdict ") {
            Some(if l.ends_with("holds") {
                l.replace(": holds", ": fails")
            } else {
                l.replace(": fails", ": holds")
            })
        } else if l.starts_with("pi ") {
            let p = l.rfind(')').unwrap();
            Some(format!("{}9{}", &l[..p], &l[p..]))
        } else if l.starts_with("figure") && (l.contains(" solid ") || l.contains(" open ") || l.contains(" box ")) {
            // Drop the first point.
            let p = l.find('(').unwrap();
            let q = l[p..].find(')').unwrap() + p;
            Some(format!("{}{}", &l[..p], l[q + 1..].trim_start()))
        } else if l.starts_with("summand ") {
            Some(l.replace("M2)", "Sigma(1,0,M2))"))
        } else {
            None
        };
        if let Some(m) = mutated {
            if m != *l && !m.trim_end().ends_with("solid") && !m.trim_end().ends_with("open") {
                let mut v = lines.clone();
                v[i] = &m;
                out.push((format!("line {}: {l}  =>  {m}", i + 1), v.join("\n")));
            }
        }
    }
    out
}

#[test]
fn every_mutated_fixture_fails() {
    let mut total = 0;
    let mut survivors = Vec::new();
    for name in builtin_names() {
        let text = builtin_text(name).unwrap();
        let muts = mutants(text);
        assert!(!muts.is_empty(), "{name}: no mutants");
        let results: Vec<(String, bool)> = std::thread::scope(|sc| {
            let handles: Vec<_> = muts
                .into_iter()
                .map(|(what, t)| {
                    sc.spawn(move || {
                        let ok = match parse_fixture(&t) {
                            Ok(f) => verify(&f).ok(),
                            Err(_) => false,
                        };
                        (what, ok)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (what, ok) in results {
            total += 1;
            if ok {
                survivors.push(format!("{name} {what}"));
            }
        }
    }
    assert!(total > 100, "only {total} mutants");
    assert!(
        survivors.is_empty(),
        "mutants that still verify:\n{}",
        survivors.join("\n")
    );
}

#[test]
fn mutated_fixture_file_exits_1() {
    let dir = std::env::temp_dir().join(format!("motivic-ext-fix-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.fix");
    let text = builtin_text("dq2")
        .unwrap()
        .replace("relation h0 y = tau h1^2 x", "relation h0 y = 0");
    std::fs::write(&path, text).unwrap();
    let (code, out, _) = run(&["verify", "--fixture-file", path.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL: h0 y = 0 does not hold"), "{out}");
    std::fs::remove_dir_all(&dir).ok();
}
