//! Family 15 at t = 0, rebuilt from cyclotomic factors: with
//! S = {0, 1, 2, 4, 5, 8, 10}, A0 = Π_{i∈S} (ζ^i x1 + x2) has coefficients in
//! Q(α) with α = ζ + ζ² + ζ⁴ + ζ⁸ and α² − α + 4 = 0.

use std::io::Write;

use isojac::catalog::cyclotomic::{cyclotomic_field, zeta};
use isojac::catalog::{load_family, FamilyId};
use isojac::field::{FieldElement, FieldEmbedding, FieldTower, StepPoly};
use isojac::poly::CorrPoly;
use isojac::verify::verify_family;
use serde_json::json;

const S: [u32; 7] = [0, 1, 2, 4, 5, 8, 10];

fn derived_a0() -> (CorrPoly, FieldEmbedding) {
    let big = cyclotomic_field(15);
    let z = zeta(&big);
    let small = FieldTower::with_names(vec![StepPoly::rational(&[4, -1, 1])], vec!["alpha15".into()], true).unwrap();
    let image = [1, 2, 4, 8].iter().fold(FieldElement::zero(&big), |acc, &i| &acc + &z.pow(i));
    let emb = FieldEmbedding::new(&small, &big, vec![image]).unwrap();
    let product = S.iter().fold(CorrPoly::from_int(&big, 1), |acc, &i| {
        &acc * &(&CorrPoly::x1(&big).scale(&z.pow(i)) + &CorrPoly::x2(&big))
    });
    let terms: Vec<_> = product
        .terms()
        .map(|(m, c)| (*m, emb.preimage(c).expect("coefficients lie in Q(alpha15)")))
        .collect();
    let a0 = CorrPoly::from_terms(&small, terms);
    assert_eq!(a0.embed(&emb), product);
    (a0, emb)
}

fn fixture_file() -> tempfile::NamedTempFile {
    let (a0, _) = derived_a0();
    let data = json!({
        "family": "15",
        "n": 15,
        "generators": ["alpha15"],
        "field": [["4", "-1", "1"]],
        "A": a0.to_serialized(),
        "sign_of_g": -1,
        "tau_sign": 1,
        "expected": {
            "m": 4, "e": 2, "nu": "d",
            "kernel_template": [
                {"divisor": "4", "exponent": {"15": "1", "5": "-1", "3": "-1"}},
                {"divisor": "2", "exponent": {"5": "2", "3": "2"}}
            ]
        }
    });
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "{data}").unwrap();
    file
}

#[test]
fn derived_factor_is_tau_symmetric_and_divides_the_fermat_difference() {
    let (a0, emb) = derived_a0();
    assert_eq!(a0.shape_check(15).unwrap(), 7);
    assert_eq!(a0.tau(), a0.sigma());
    let big = emb.target().clone();
    let diff = &CorrPoly::monomial(&big, 15, 0, 0) + &CorrPoly::monomial(&big, 0, 15, 0);
    assert!(diff.exact_divide(&a0.embed(&emb)).is_ok());
}

#[test]
fn derived_family_matches_the_table_row() {
    let file = fixture_file();
    for d in 2..=5 {
        let spec = load_family(FamilyId::Cnc(15), Some(file.path())).unwrap();
        let report = verify_family(spec, d, 0);
        assert!(report.pass, "d = {d}: {:#?}", report.checks);
        assert_eq!(report.m, Some(4));
    }
}
