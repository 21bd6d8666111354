mod common;

use common::{naive_disc, naive_disc_direct};
use decluster::coloring::Mode;
use decluster::discrepancy::{disc_report_fn, Witness};
use decluster::{disc_report, generate_scheme, Budget, ScaledValue, Scheme};
use proptest::prelude::*;

fn tiled(s: &Scheme) -> impl Fn(&[u64]) -> u32 + '_ {
    move |x| s.coloring.tiled_color(x).unwrap()
}

fn witness(w: &(Vec<u64>, Vec<u64>, u32)) -> Witness {
    Witness { lo: w.0.clone(), hi: w.1.clone(), color: w.2 }
}

fn assert_matches_oracle(s: &Scheme, n: u64) {
    let r = disc_report(s, n, false, &Budget::default()).unwrap();
    let o = naive_disc(s.dim(), s.disks(), n, &tiled(s));
    let ctx = format!("M={} d={} N={n} mode={}", s.disks(), s.dim(), s.mode);
    assert_eq!(r.disc_plus.num, o.plus_num, "{ctx}");
    assert_eq!(r.disc.unwrap().num, o.disc_num, "{ctx}");
    assert_eq!(r.disc_plus_witness, witness(&o.plus_box), "{ctx}");
    assert_eq!(r.disc_witness.clone().unwrap(), witness(&o.disc_box), "{ctx}");
    r.check_invariants().unwrap();
    let plus_only = disc_report(s, n, true, &Budget::default()).unwrap();
    assert_eq!(plus_only.disc_plus, r.disc_plus);
    assert_eq!(plus_only.disc_plus_witness, r.disc_plus_witness);
    assert!(plus_only.disc.is_none());
}

#[test]
fn oracle_agrees_two_dims() {
    for m in 1..=6 {
        for mode in [Mode::Paper, Mode::Cyclic, Mode::Random] {
            let s = generate_scheme(m, 2, mode, Some(7)).unwrap();
            for n in [1, 2, m as u64, m as u64 + 1, 2 * m as u64 + 1, 12] {
                assert_matches_oracle(&s, n);
            }
        }
    }
}

#[test]
fn oracle_agrees_three_dims() {
    for m in [1, 2, 3, 4, 5, 6] {
        for mode in [Mode::Paper, Mode::Cyclic, Mode::Random] {
            let s = generate_scheme(m, 3, mode, Some(1)).unwrap();
            for n in [1, 3, m as u64 + 1, 7] {
                assert_matches_oracle(&s, n);
            }
        }
    }
}

#[test]
fn oracle_agrees_one_dim() {
    for m in 1..=5 {
        let s = generate_scheme(m, 1, Mode::Cyclic, None).unwrap();
        for n in 1..=9 {
            assert_matches_oracle(&s, n);
        }
    }
}

#[test]
fn cumulative_oracle_matches_direct_counting() {
    for m in 2..=4 {
        let s = generate_scheme(m, 2, Mode::Random, Some(3)).unwrap();
        for n in 1..=6 {
            let o = naive_disc(2, m, n, &tiled(&s));
            assert_eq!(naive_disc_direct(2, m, n, &tiled(&s)), (o.disc_num, o.plus_num));
        }
    }
}

#[test]
fn checkerboard_half() {
    for d in [2, 3] {
        let s = generate_scheme(2, d, Mode::Checkerboard, None).unwrap();
        for n in [2, 3, 5, 8] {
            let r = disc_report(&s, n, false, &Budget::default()).unwrap();
            assert_eq!(r.disc_plus, ScaledValue::new(1, 2));
        }
    }
}

#[test]
fn cyclic_eight_by_eight() {
    let s = generate_scheme(8, 2, Mode::Cyclic, None).unwrap();
    let r = disc_report(&s, 8, false, &Budget::default()).unwrap();
    let o = naive_disc(2, 8, 8, &tiled(&s));
    assert_eq!(r.disc_plus, ScaledValue::new(16, 8));
    assert_eq!(o.plus_num, 16);
    // [1..4]^2 reaches the maximum in some color
    let t = decluster::discrepancy::PrefixTable::build(&s, 8, &Budget::default()).unwrap();
    let b = "1:4,1:4".parse().unwrap();
    let best = (1..=8).map(|c| 8 * t.count(&b, c).unwrap() as i64 - 16).max().unwrap();
    assert_eq!(best, 16);
}

#[test]
fn constant_coloring() {
    let r = disc_report_fn(2, 2, 2, &|_| 1, false, &Budget::default()).unwrap();
    assert_eq!(r.disc_plus, ScaledValue::new(4, 2));
    assert_eq!(naive_disc(2, 2, 2, &|_| 1).plus_num, 4);
}

fn arbitrary_coloring() -> impl Strategy<Value = (usize, u32, u64, Vec<u32>)> {
    (1usize..=2, 1u32..=4, 1u64..=6).prop_flat_map(|(d, m, n)| {
        let cells = (n as usize).pow(d as u32);
        (Just(d), Just(m), Just(n), prop::collection::vec(1..=m, cells))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arbitrary_colorings_match_oracle((d, m, n, cells) in arbitrary_coloring()) {
        let color = |x: &[u64]| cells[x.iter().fold(0usize, |a, &v| a * n as usize + (v - 1) as usize)];
        let r = disc_report_fn(d, m, n, &color, false, &Budget::default()).unwrap();
        let o = naive_disc(d, m, n, &color);
        prop_assert_eq!(r.disc_plus.num, o.plus_num);
        prop_assert_eq!(r.disc.unwrap().num, o.disc_num);
        prop_assert_eq!(r.disc_plus_witness, witness(&o.plus_box));
        prop_assert_eq!(r.disc_witness.unwrap(), witness(&o.disc_box));
    }

    #[test]
    fn random_schemes_match_oracle(m in 2u32..=5, n in 1u64..=9, seed in any::<u64>()) {
        let s = generate_scheme(m, 2, Mode::Random, Some(seed)).unwrap();
        assert_matches_oracle(&s, n);
    }
}
