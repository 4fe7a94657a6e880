//! Structural properties of resolutions, Ext and products on every builtin
//! module.

mod common;

use common::*;
use motivic_ext::modules::{ses_builtin, ModuleMap, SES_FAMILIES};
use motivic_ext::products::{les_check, Ring};

#[test]
fn d_squared_exact_minimal() {
    for name in MODULES {
        resolution_checks(name).unwrap();
    }
}

#[test]
fn enlargement_is_stable() {
    for name in MODULES {
        enlargement(name).unwrap();
    }
}

#[test]
fn classical_specialization() {
    for name in MODULES {
        classical(name).unwrap();
    }
}

#[test]
fn les_for_every_family() {
    for (fam, n) in SES_FAMILIES {
        les(fam, n).unwrap();
    }
}

#[test]
fn les_catches_a_corrupted_inclusion() {
    let mut ses = ses_builtin("DQ2_block", 14, 34).unwrap();
    ses.inclusion = ModuleMap {
        images: vec![Vec::new(); ses.sub.len()],
    };
    let rep = les_check(&ses, 6, 34).unwrap();
    // Caught by the rank count, not only by the structural check.
    assert!(
        rep.failures.iter().any(|f| f.starts_with("not exact")),
        "{:?}",
        rep.failures
    );
}

#[test]
fn theta_actions_associate() {
    let ring = Ring::new(S, T + 2).unwrap();
    for name in ["M2", "DQ(2)", "DQ(14)", "DQ(17)", "R"] {
        associativity(&ring, name).unwrap();
    }
}
