//! Property checks shared by the property suite and the acceptance run.
//! Each returns the number of things checked, or a description of the first
//! failure.

#![allow(dead_code)]

use motivic_ext::modules::{builtin, ses_builtin};
use motivic_ext::products::{les_check, ExtElem, ModuleExt, Ring, THETA_NAMES};
use motivic_ext::resolution::{ext_chart, resolve, ExtChart};
use std::collections::BTreeMap;

pub const MODULES: &[&str] = &[
    "M2",
    "R",
    "DQinf",
    "DQ(1)",
    "DQ(2)",
    "DQ(3)",
    "DQ(4)",
    "DQ(5)",
    "DQ(14)",
    "DQ(15)",
    "DQ(16)",
    "DQ(17)",
    "Sigma(15,8,M2)",
    "DirectSum(DQ(14),Sigma(15,8,M2))",
];
pub const S: usize = 8;
pub const T: i32 = 30;

pub fn resolution_checks(name: &str) -> Result<usize, String> {
    let m = builtin(name, T).map_err(|e| e.to_string())?;
    let r = resolve(&m, S, T).map_err(|e| e.to_string())?;
    r.check_d_squared().map_err(|e| format!("{name}: d∘d: {e}"))?;
    r.check_minimal().map_err(|e| format!("{name}: minimality: {e}"))?;
    let mut n = 2;
    for s in 0..S {
        for a in m.min_degree().unwrap_or(0)..=r.valid_t {
            r.check_exact(s, a).map_err(|e| format!("{name}: exactness: {e}"))?;
            n += 1;
        }
    }
    Ok(n)
}

pub fn enlargement(name: &str) -> Result<usize, String> {
    let chart = |t: i32| -> Result<ExtChart, String> {
        let m = builtin(name, t).map_err(|e| e.to_string())?;
        Ok(ext_chart(&resolve(&m, S, t).map_err(|e| e.to_string())?))
    };
    let (small, big) = (chart(T)?, chart(T + 6)?);
    let cut = |c: &ExtChart| {
        c.shapes()
            .into_iter()
            .filter(|((n, s, _), _)| n + *s as i32 <= small.valid_t)
            .collect::<BTreeMap<_, _>>()
    };
    let (a, b) = (cut(&small), cut(&big));
    if a != b {
        return Err(format!("{name}: cells change when t_max grows"));
    }
    Ok(a.len())
}

pub fn classical(name: &str) -> Result<usize, String> {
    let m = builtin(name, T).map_err(|e| e.to_string())?;
    let mot = ext_chart(&resolve(&m, S, T).map_err(|e| e.to_string())?);
    let cl = ext_chart(&resolve(&m.to_classical(), S, T).map_err(|e| e.to_string())?);
    let mut free: BTreeMap<(i32, usize), usize> = BTreeMap::new();
    for c in &mot.cells {
        *free.entry((c.n, c.s)).or_default() += c.free;
    }
    let mut dims: BTreeMap<(i32, usize), usize> = BTreeMap::new();
    for c in &cl.cells {
        *dims.entry((c.n, c.s)).or_default() += c.free + c.torsion.len();
    }
    free.retain(|_, v| *v > 0);
    dims.retain(|_, v| *v > 0);
    if free != dims {
        let bad = free
            .keys()
            .chain(dims.keys())
            .find(|k| free.get(k) != dims.get(k))
            .unwrap();
        return Err(format!(
            "{name}: at (n,s) = {bad:?} free rank {:?} vs classical {:?}",
            free.get(bad),
            dims.get(bad)
        ));
    }
    Ok(free.len())
}

pub fn les(family: &str, n: i32) -> Result<usize, String> {
    let ses = ses_builtin(family, n, 34).map_err(|e| e.to_string())?;
    let rep = les_check(&ses, 6, 34).map_err(|e| e.to_string())?;
    if !rep.ok() {
        return Err(format!("{family}: {}", rep.failures.join("; ")));
    }
    if rep.checked == 0 {
        return Err(format!("{family}: nothing checked"));
    }
    Ok(rep.checked)
}

/// θi (θj u) against (θi θj) u for classes u with s ≤ 2.
pub fn associativity(ring: &Ring, name: &str) -> Result<usize, String> {
    let m = builtin(name, T).map_err(|e| e.to_string())?;
    let mut me = ModuleExt::new(&m, S, T, ring).map_err(|e| e.to_string())?;
    let classes: Vec<ExtElem> = me.ext.iter().filter(|c| c.s <= 2).map(ExtElem::from_class).collect();
    let mut checked = 0;
    for u in &classes {
        for i in 0..4 {
            for j in 0..4 {
                let mut mono = [0u32; 4];
                mono[i] += 1;
                mono[j] += 1;
                let Ok(p) = ring.monomial(&mono).cloned() else { continue };
                let Ok(direct) = me.mul(&p, u) else { continue };
                let Ok(inner) = me.act(ring, j, u) else { continue };
                let Ok(twice) = me.act(ring, i, &inner) else { continue };
                let (Ok(a), Ok(b)) = (me.express(&direct), me.express(&twice)) else {
                    continue;
                };
                if a != b {
                    return Err(format!(
                        "{name}: {} {} on {:?}",
                        THETA_NAMES[i],
                        THETA_NAMES[j],
                        u.tridegree()
                    ));
                }
                checked += 1;
            }
        }
    }
    if checked < 20 {
        return Err(format!("{name}: only {checked} products in window"));
    }
    Ok(checked)
}
