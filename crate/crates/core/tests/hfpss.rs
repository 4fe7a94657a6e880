use motivic_ext::hfpss::{
    d3, e2_page, e_infinity, group_cohomology, monomial_at, run_d3, Coeff, CoeffRing, HMono, Page, Window,
};
use proptest::prelude::*;

fn window() -> Window {
    Window::default()
}

#[test]
fn group_cohomology_of_z2() {
    // Trivial action: Z, Z/2, 0, Z/2, ...; sign action: 0, Z/2, 0, Z/2 shifted.
    assert_eq!(group_cohomology(0, Coeff::Trivial).free, 1);
    assert_eq!(group_cohomology(1, Coeff::Trivial).torsion, Vec::<u32>::new());
    assert_eq!(group_cohomology(2, Coeff::Trivial).torsion, vec![1]);
    assert!(group_cohomology(0, Coeff::Sign).is_zero());
    assert_eq!(group_cohomology(1, Coeff::Sign).torsion, vec![1]);
}

#[test]
fn kgl_e2_is_8_periodic() {
    let w = Window {
        n_lo: -12,
        n_hi: 12,
        p_max: 6,
        u_lo: -14,
        u_hi: 14,
    };
    let e2 = e2_page(CoeffRing::Kgl, w).unwrap();
    let mut checked = 0;
    for c in &e2.cells {
        let t = (c.n + 8, c.p, c.u + 4);
        if t.0 <= w.n_hi && t.2 <= w.u_hi {
            assert_eq!(e2.group((c.n, c.p, c.u)), e2.group(t), "{:?}", (c.n, c.p, c.u));
            checked += 1;
        }
    }
    assert!(checked > 20);
}

#[test]
fn d3_squares_to_zero_on_pages() {
    for ring in [CoeffRing::Kgl, CoeffRing::Connective] {
        let e2 = e2_page(ring, window()).unwrap();
        let mut checked = 0;
        for c in &e2.cells {
            if let Some(x) = monomial_at(ring, c.n, c.p, c.u) {
                let (c1, y) = d3(&x);
                let (c2, z) = d3(&y);
                // z is h1-divisible, hence of order 2.
                assert!(z.i > 0 && (c1 * c2) % 2 == 0, "{x:?}");
                checked += 1;
            }
        }
        assert!(checked > 50);
        assert_eq!(run_d3(&e2).r, 4);
    }
}

#[test]
fn e4_is_e_infinity() {
    for ring in [CoeffRing::Kgl, CoeffRing::Connective] {
        let (_, e4, einf) = e_infinity(ring, window()).unwrap();
        assert_eq!(e4.cells, einf.cells);
    }
}

#[test]
fn page_json_round_trips() {
    let (_, _, einf) = e_infinity(CoeffRing::Connective, window()).unwrap();
    let json = einf.to_json();
    let back: Page = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_json(), json);
}

fn mono() -> impl Strategy<Value = HMono> {
    (0u32..4, 0u32..6, -3i32..4).prop_map(|(k, i, m)| HMono::new(k, i, m))
}

proptest! {
    #[test]
    fn d3_squared_is_zero(x in mono()) {
        let (c1, y) = d3(&x);
        let (c2, _) = d3(&y);
        // d3 of anything is h1-divisible, so of order 2.
        prop_assert!(y.i >= 3);
        prop_assert_eq!(c1 * c2 % 2, 0);
    }

    #[test]
    fn d3_is_a_derivation(x in mono(), y in mono()) {
        let (cx, dx) = d3(&x);
        let (cy, dy) = d3(&y);
        let (cxy, dxy) = d3(&x.mul(&y));
        prop_assert_eq!(dxy, dx.mul(&y));
        prop_assert_eq!(dxy, x.mul(&dy));
        prop_assert_eq!(cxy, cx + cy);
    }

    #[test]
    fn d3_shifts_tridegree(x in mono()) {
        let (n, p, u) = x.tridegree();
        let (_, y) = d3(&x);
        prop_assert_eq!(y.tridegree(), (n - 1, p + 3, u));
    }
}
