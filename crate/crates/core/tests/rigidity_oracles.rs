use std::collections::HashSet;

use lociso::generators::sturmian::is_black;
use lociso::generators::*;
use lociso::iso::extraction_compare;
use lociso::rigidity::*;

fn q(s: &str) -> QuadraticIrrational {
    s.parse().unwrap()
}

/// Factor of length 2s+1 centred at y.
fn factor(r: QuadraticIrrational, s_off: QuadraticIrrational, y: i64, s: i64) -> Vec<bool> {
    (y - s..=y + s).map(|a| is_black(r, s_off, a).unwrap()).collect()
}

#[test]
fn quarter_offset_fails_q_with_a_witness_anchor() {
    let (r, s) = (q("sqrt(2)"), q("1/4"));
    let m = gen_sturmian(r, s, 400, Orientation::Directed).unwrap();
    let rep = property_q_check(&m, 3, 30).unwrap();
    assert!(!rep.holds);
    let x = rep.witness_anchor.unwrap();
    let c: i64 = m.name(x).parse().unwrap();
    let fs: HashSet<Vec<bool>> = (c - 3..=c + 3).map(|y| factor(r, s, y, 30)).collect();
    assert_eq!(fs.len(), 7);
    // the same anchor is a characterization witness at (3, 30)
    let ball: Vec<_> = m.layers(x, 3).into_iter().flatten().collect();
    assert!(matches!(separation(&m, &ball, 30), Separation::Separated { s } if s <= 30));
}

#[test]
fn quarter_offset_characterization() {
    let (r, s) = (q("sqrt(2)"), q("1/4"));
    let m = gen_sturmian(r, s, 2000, Orientation::Directed).unwrap();
    let rep = rigidity_characterization(&m, &[1, 2, 3, 4, 5, 6], 30, &RigidityOptions::default()).unwrap();
    assert_eq!(rep.verdict, RigidityVerdict::CharacterizationHoldsUpToBounds);
    for (radius, res) in &rep.per_radius {
        let RadiusResult::Witness { anchor, s: used } = res else {
            panic!("{res:?}")
        };
        let c: i64 = m.name(*anchor).parse().unwrap();
        let (rr, ss) = (*radius as i64, *used as i64);
        let fs: HashSet<Vec<bool>> = (c - rr..=c + rr).map(|y| factor(r, s, y, ss)).collect();
        assert_eq!(fs.len() as i64, 2 * rr + 1);
        if ss > 0 {
            // least: one radius smaller does not separate
            let fs: HashSet<Vec<bool>> = (c - rr..=c + rr).map(|y| factor(r, s, y, ss - 1)).collect();
            assert!((fs.len() as i64) < 2 * rr + 1);
        }
    }
}

#[test]
fn q_holds_when_one_class() {
    let m = gen_grid(&[60], false, &Coloring::none()).unwrap();
    let rep = property_q_check(&m, 1, 10).unwrap();
    assert!(rep.holds);
}

#[test]
fn q_transfers_to_extraction_equivalent_windows() {
    let m = gen_grid(&[60], false, &Coloring::period(2)).unwrap();
    let n = gen_grid(&[45], false, &Coloring::period(2)).unwrap();
    let (r, s) = (2, 6);
    let cmp = extraction_compare(&m, &n, r + s).unwrap();
    assert!(cmp.m_in_n && cmp.n_in_m);
    assert!(property_q_check(&m, r, s).unwrap().holds);
    assert!(property_q_check(&n, r, s).unwrap().holds);
}

#[test]
fn lip_hypothesis_is_checked_when_asked() {
    let mut pattern = vec!["White".to_string(); 41];
    pattern[20] = "Black".into();
    let m = gen_grid(
        &[41],
        false,
        &Coloring {
            weights: vec![1],
            pattern,
        },
    )
    .unwrap();
    let opts = RigidityOptions {
        lip_radius: Some(0),
        ..Default::default()
    };
    let err = rigidity_characterization(&m, &[1], 5, &opts).unwrap_err();
    assert!(matches!(err, lociso::Error::HypothesisUnverified(_)));
}

#[test]
fn short_trace_is_coherent() {
    let m = gen_sturmian(q("sqrt(2)"), q("1/4"), 3000, Orientation::Directed).unwrap();
    let trace = rigid_limit(&m, 2, m.element("0").unwrap(), &RigidLimitOptions::default()).unwrap();
    assert_eq!(trace.steps.len(), 3);
    assert!(trace.truncated.is_none());
    let checks = verify_trace(&m, &trace).unwrap();
    assert!(checks.iter().all(|c| c.passed()), "{checks:?}");
    // θ_0 then θ_1 composes to an injective map on the step-0 ball
    let th1 = trace.steps[2].theta.as_ref().unwrap();
    let th0 = trace.steps[1].theta.as_ref().unwrap();
    let images: HashSet<_> = th0.map.iter().map(|&(_, b)| th1.get(b).unwrap()).collect();
    assert_eq!(images.len(), th0.len());
}
