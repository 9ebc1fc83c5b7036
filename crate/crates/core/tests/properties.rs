use dendrite_core::symbolic::{agreement_depth, proximity, seq, simeq, Agreement, Proximity, SymSeq, Symbol};
use proptest::prelude::*;

fn symbols(alphabet: &'static [Symbol], len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(prop::sample::select(alphabet), len)
}

const BIN: &[Symbol] = &[Symbol::Zero, Symbol::One];
const ALL: &[Symbol] = &Symbol::ALL;

fn exact(alphabet: &'static [Symbol]) -> impl Strategy<Value = SymSeq> {
    (symbols(alphabet, 0..6), symbols(alphabet, 1..5)).prop_map(|(p, q)| SymSeq::exact(p, q).unwrap())
}

/// Two binary points sharing a prefix, so agreement is not decided at index 0.
fn pair() -> impl Strategy<Value = (SymSeq, SymSeq)> {
    (symbols(BIN, 0..10), exact(BIN), exact(BIN)).prop_map(|(w, a, b)| (a.prepend(&w), b.prepend(&w)))
}

fn tau() -> impl Strategy<Value = SymSeq> {
    prop::sample::select(vec!["[10*]", "1[0]", "[110*]", "[1]", "1[10]"]).prop_map(seq)
}

proptest! {
    #[test]
    fn literal_round_trip(s in exact(ALL)) {
        let lit = s.literal().unwrap();
        let back = seq(&lit);
        prop_assert_eq!(back.literal().unwrap(), lit);
        prop_assert!(back.equals_to_depth(&s, 40).unwrap());
    }

    #[test]
    fn agreement_matches_word_relation((x, y) in pair(), t in tau()) {
        let cap = 24;
        let a = agreement_depth(&x, &y, &t, cap).unwrap();
        for n in 0..=cap {
            let direct = simeq(x.truncate(n).unwrap().symbols(), y.truncate(n).unwrap().symbols(), &t)
                .unwrap()
                .holds;
            prop_assert_eq!(a.holds_at(n), direct, "n = {}", n);
        }
    }

    #[test]
    fn agreement_is_downward_closed((x, y) in pair(), t in tau()) {
        if let Agreement::FailAt(m) = agreement_depth(&x, &y, &t, 40).unwrap() {
            prop_assert!((m..=40).all(|n| !agreement_depth(&x, &y, &t, 40).unwrap().holds_at(n)));
            prop_assert!((0..m).all(|n| agreement_depth(&x, &y, &t, n).unwrap().holds_at(n)));
        }
    }

    #[test]
    fn proximity_is_symmetric((x, y) in pair(), t in tau()) {
        prop_assert_eq!(proximity(&x, &y, &t, 48).unwrap(), proximity(&y, &x, &t, 48).unwrap());
        prop_assert_eq!(proximity(&x, &x, &t, 48).unwrap(), Proximity::AtMost(48));
    }

    #[test]
    fn shift_loses_at_most_one_level((x, y) in pair(), t in tau()) {
        let p = proximity(&x, &y, &t, 48).unwrap();
        let q = proximity(&x.shift(1).unwrap(), &y.shift(1).unwrap(), &t, 48).unwrap();
        if let Proximity::Value(m) = q {
            prop_assert!(m + 1 >= p.exponent(), "{} then {}", p, q);
        }
    }
}
