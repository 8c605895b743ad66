//! Small reference games used by examples, tests and documentation.

use crate::costfn::{AffineFn, Rational};
use crate::model::{Guard, Location, Ptg, Transition};

fn zero_cost() -> AffineFn {
    AffineFn::ints(0, 0)
}

/// Seven-location simple game with a single target `lf`; all guards `[0,1]`.
pub fn simple_seven() -> Ptg {
    let locations = vec![
        Location::min("l1", -2),
        Location::max("l2", -14),
        Location::min("l3", 4),
        Location::max("l4", 3),
        Location::min("l5", 8),
        Location::min("l6", -12),
        Location::min("l7", -16),
        Location::target("lf", zero_cost()),
    ];
    let e = |s: usize, t: usize, w: i64| Transition::new(s - 1, if t == 0 { 7 } else { t - 1 }, w);
    let transitions = vec![
        e(1, 2, 0),
        e(2, 3, 0),
        e(2, 5, 0),
        e(5, 6, 0),
        e(6, 1, 1),
        e(5, 7, 2),
        e(3, 7, 6),
        e(3, 1, 0),
        e(3, 4, 0),
        e(4, 0, -7),
        e(7, 0, 0),
        e(1, 0, 0),
    ];
    Ptg::new(locations, transitions, 1)
}

/// Untimed game where Min must loop through a Max location before leaving with price `-w`.
pub fn untimed_loop(w: i64) -> Ptg {
    let locations = vec![Location::max("l1", 0), Location::min("l2", 0), Location::target("lf", zero_cost())];
    let transitions = vec![
        Transition::new(0, 2, -w),
        Transition::new(0, 1, -1),
        Transition::new(1, 0, 0),
        Transition::new(1, 2, 0),
    ];
    Ptg::new(locations, transitions, 1)
}

/// Game with a reset cycle whose price approaches 0 from below.
pub fn creeping_reset() -> Ptg {
    let one = Rational::one();
    let locations = vec![
        Location::min("l0", 0),
        Location::max("l1", -1),
        Location::max("l2", 1),
        Location::target("lf", zero_cost()),
    ];
    let transitions = vec![
        Transition::new(0, 1, 0),
        Transition::new(1, 0, 0).guarded(Guard::point(one.clone())).with_reset(),
        Transition::new(1, 2, 0),
        Transition::new(2, 3, 0).guarded(Guard::point(one)),
        Transition::new(0, 3, 1),
    ];
    Ptg::new(locations, transitions, 1)
}

/// Reset game whose reset cycles all cost at most -1.
pub fn unit_reset() -> Ptg {
    let (z, one) = (Rational::zero(), Rational::one());
    let below_one = Guard { lo: z.clone(), lo_closed: true, hi: one.clone(), hi_closed: false };
    let open = Guard { lo: z, lo_closed: false, hi: one, hi_closed: false };
    let locations = vec![Location::min("l0", 0), Location::max("l1", -1), Location::target("lf", zero_cost())];
    let transitions = vec![
        Transition::new(0, 2, 1).guarded(below_one.clone()),
        Transition::new(1, 2, 0).guarded(open),
        Transition::new(0, 1, 0).guarded(below_one.clone()),
        Transition::new(1, 0, -1).guarded(below_one).with_reset(),
    ];
    Ptg::new(locations, transitions, 1)
}
