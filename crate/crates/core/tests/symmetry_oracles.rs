use lociso::generators::sturmian::is_black;
use lociso::generators::*;
use lociso::iso::PartialIso;
use lociso::symmetry::*;
use lociso::{Elem, Language, Structure, StructureBuilder};

fn q(s: &str) -> QuadraticIrrational {
    s.parse().unwrap()
}

fn int(m: &Structure, e: Elem) -> i64 {
    m.name(e).parse().unwrap()
}

#[test]
fn period_three_colouring_has_translation_by_three() {
    let m = gen_grid(&[61], false, &Coloring::period(3)).unwrap();
    let x = m.element("30").unwrap();
    let opts = SymmetryOptions {
        anchor: Some(x),
        exclude_identity: true,
        ..Default::default()
    };
    let rep = find_symmetries(&m, 3, 10, &opts).unwrap();
    assert_eq!(rep.verdict, SymmetryVerdict::Found);
    let targets: Vec<i64> = rep.found.iter().map(|f| int(&m, f.target)).collect();
    assert_eq!(targets, vec![27, 33]);
    for f in &rep.found {
        let t = int(&m, f.target) - 30;
        assert!(f.map.map.iter().all(|&(a, b)| int(&m, b) == int(&m, a) + t));
    }
}

#[test]
fn mirror_of_the_symmetric_member() {
    let r = q("sqrt(2)");
    let m = gen_sturmian(r, q("0"), 200, Orientation::Undirected).unwrap();
    let x = m.element("0").unwrap();
    let opts = SymmetryOptions {
        anchor: Some(x),
        exclude_identity: true,
        ..Default::default()
    };
    let rep = find_symmetries(&m, 2, 40, &opts).unwrap();
    assert_eq!(rep.verdict, SymmetryVerdict::Found);
    // oracle: colour(a) = colour(−a)
    assert!((-60..=60).all(|a| is_black(r, q("0"), a).unwrap() == is_black(r, q("0"), -a).unwrap()));
    assert!(rep.found.iter().any(|f| int(&m, f.target) == 0));
}

#[test]
fn quarter_offset_has_no_mirror() {
    let r = q("sqrt(2)");
    let s = q("1/4");
    let m = gen_sturmian(r, s, 200, Orientation::Undirected).unwrap();
    let x = m.element("0").unwrap();
    let opts = SymmetryOptions {
        anchor: Some(x),
        exclude_identity: true,
        ..Default::default()
    };
    let rep = find_symmetries(&m, 4, 40, &opts).unwrap();
    assert_eq!(rep.verdict, SymmetryVerdict::NoneFound);
    // oracle: every mirror and translation with |t| ≤ 4 breaks within radius 40
    let c = |a: i64| is_black(r, s, a).unwrap();
    for t in -4..=4i64 {
        assert!((-40..=40).any(|a| c(a) != c(t - a)));
        if t != 0 {
            assert!((-40..=40).any(|a| c(a) != c(a + t)));
        }
    }
}

#[test]
fn sqrt2_window_has_no_small_period() {
    let m = gen_sturmian(q("sqrt(2)"), q("0"), 400, Orientation::Directed).unwrap();
    let rep = detect_periodicity(&m, 20, None).unwrap();
    assert_eq!(rep.rank, None);
}

#[test]
fn checkerboard_grid_period_is_two_adjacent_points() {
    let m = gen_grid(&[12, 12], false, &Coloring::checkerboard(2)).unwrap();
    let rep = detect_periodicity(&m, 6, None).unwrap();
    assert_eq!(rep.rank, Some(2));
    assert!(rep.weakly_connected);
    let (a, b) = (rep.period[0], rep.period[1]);
    assert_eq!(m.distance(a, b, 2), Some(1));
}

#[test]
fn identity_extends_to_identity() {
    let m = gen_grid(&[40], false, &Coloring::period(2)).unwrap();
    let rep = detect_periodicity(&m, 4, None).unwrap();
    let x = m.element("20").unwrap();
    let ball: Vec<Elem> = m.layers(x, 2).into_iter().flatten().collect();
    let rho = PartialIso::new(ball.iter().map(|&a| (a, a)).collect(), x, x, 2);
    let ext = extend_to_automorphism(&m, &rep, &rho).unwrap();
    assert!(ext.is_identity());
}

#[test]
fn unit_shift_of_the_plain_grid() {
    let m = gen_grid(&[14, 14], false, &Coloring::none()).unwrap();
    let rep = detect_periodicity(&m, 4, None).unwrap();
    assert_eq!(rep.rank, Some(1));
    let x = m.element("7:7").unwrap();
    let coords = |e: Elem| -> Vec<i64> { m.name(e).split(':').map(|c| c.parse().unwrap()).collect() };
    let shift = |e: Elem| {
        let c = coords(e);
        m.element(&format!("{}:{}", c[0] + 1, c[1])).unwrap()
    };
    let ball: Vec<Elem> = m.layers(x, 1).into_iter().flatten().collect();
    let rho = PartialIso::new(ball.iter().map(|&a| (a, shift(a))).collect(), x, shift(x), 1);
    let ext = extend_to_automorphism(&m, &rep, &rho).unwrap();
    assert!(ext.len() > ball.len());
    for &(a, b) in &ext.map {
        let (ca, cb) = (coords(a), coords(b));
        assert_eq!((cb[0] - ca[0], cb[1] - ca[1]), (1, 0));
    }
}

fn coloured_cycle(pattern: &str) -> Structure {
    let lang = Language::new([("Succ", 2), ("Black", 1), ("White", 1)]).unwrap();
    let mut b = StructureBuilder::new(lang);
    let n = pattern.len();
    let ids: Vec<Elem> = (0..n).map(|i| b.element(&i.to_string())).collect();
    for (i, c) in pattern.chars().enumerate() {
        b.tuple(0, &[ids[i], ids[(i + 1) % n]]);
        b.tuple(if c == '1' { 1 } else { 2 }, &[ids[i]]);
    }
    b.build()
}

#[test]
fn rotated_colourings_of_a_six_cycle() {
    let m = coloured_cycle("010101");
    let n = coloured_cycle("101010");
    let per = detect_periodicity(&n, 6, None).unwrap();
    let rep = periodic_isomorphism(&m, &n, &per, None).unwrap();
    assert_eq!(rep.verdict, IsoVerdict::Found);
    let map = rep.map.unwrap();
    map.verify(&m, &n).unwrap();
    assert_eq!(map.len(), 6);
    // oracle: the isomorphisms are exactly the odd rotations
    let shift = (int(&n, map.get(0).unwrap()) - 0).rem_euclid(6);
    assert_eq!(shift % 2, 1);
    assert!(map
        .map
        .iter()
        .all(|&(a, b)| (int(&n, b) - int(&m, a)).rem_euclid(6) == shift));
}
