use pi_core::catalog::{catalog_algebra, catalog_names};
use pi_core::codim::{codimensions, CodimConfig, Method, Target};
use pi_core::linalg::RatSpace;
use proptest::prelude::*;

fn exact() -> CodimConfig {
    CodimConfig { method: Method::Exact, ..Default::default() }
}

fn names() -> Vec<&'static str> {
    catalog_names()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn codimensions_split_into_central_and_proper_parts(i in 0usize..22, n in 1usize..=4) {
        let name = names()[i % names().len()];
        let (a, e) = catalog_algebra(name).unwrap();
        let t = Target::new(a, e.envelope);
        let c = codimensions(&t, n, &exact()).unwrap();
        prop_assert_eq!(c.result.c_n, c.result.c_n_z + c.result.c_n_delta);
        prop_assert!(c.identities.is_subspace_of(&c.central).unwrap());
    }

    #[test]
    fn subalgebras_satisfy_more_identities(
        i in 0usize..22,
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..4),
        n in 1usize..=3,
    ) {
        let name = names()[i % names().len()];
        let (a, e) = catalog_algebra(name).unwrap();
        let gens: Vec<_> = picks.iter().map(|p| a.basis(p.index(a.dim()))).collect();
        let s = a.generated_subalgebra(&gens);
        let labels = (1..=s.dim()).map(|k| format!("s{k}")).collect();
        let sub = a.quotient_on("sub", s.basis(), &RatSpace::new(a.dim()), labels).unwrap();
        let big = codimensions(&Target::new(a, e.envelope), n, &exact()).unwrap();
        let small = codimensions(&Target::new(sub, e.envelope), n, &exact()).unwrap();
        prop_assert!(big.identities.is_subspace_of(&small.identities).unwrap());
        prop_assert!(big.result.c_n >= small.result.c_n);
    }
}

#[test]
fn catalog_has_every_named_algebra() {
    for n in ["A_1", "A_9", "A_6^3", "A_7^1", "C_1", "C_2", "D", "D_0", "UT_2", "G", "F"] {
        assert!(names().contains(&n), "{n}");
    }
}
