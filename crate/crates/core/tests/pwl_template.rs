//! Property tests for piecewise paths, template axioms and contraction rates.

use minima_forge::builders::{
    perturb_slope, pulse_template, quadrilateral_periodic, reflect_dual, zero_template, TauChoice,
};
use minima_forge::pwl::PiecewisePath;
use minima_forge::rational::{int, rat, Rational};
use minima_forge::template::{average_rate, find_violations, validate, RateIntegral};
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(p, q)| rat(p, q))
}

/// Bounded path on `[0, end]` with `segs` segments of positive length.
fn path_strategy(dim: usize) -> impl Strategy<Value = PiecewisePath> {
    (1usize..5).prop_flat_map(move |segs| {
        (
            prop::collection::vec((1i64..=6, 1i64..=3), segs),
            prop::collection::vec(small_rat(), dim),
            prop::collection::vec(prop::collection::vec(small_rat(), dim), segs),
        )
            .prop_map(|(lengths, init, slopes)| {
                let mut knots = vec![Rational::from_integer(0.into())];
                for (p, q) in lengths {
                    let next = knots.last().unwrap() + rat(p, q);
                    knots.push(next);
                }
                let end = knots.pop().unwrap();
                let start = knots.remove(0);
                PiecewisePath::new(start, knots, Some(end), init, slopes).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_commutes_with_eval(p in path_strategy(3), off in small_rat(), s in 0i64..=16) {
        let end = p.end().unwrap().clone();
        let t = p.start() + (&end - p.start()) * rat(s, 16);
        let q = p.shifted(&off);
        prop_assert_eq!(q.eval(&(&t + &off)).unwrap(), p.eval(&t).unwrap());
    }

    #[test]
    fn normalization_preserves_values(p in path_strategy(2), s in 0i64..=20) {
        let end = p.end().unwrap().clone();
        let t = p.start() + (&end - p.start()) * rat(s, 20);
        prop_assert_eq!(p.normalized().eval(&t).unwrap(), p.eval(&t).unwrap());
    }

    #[test]
    fn reflection_is_an_involution(p in path_strategy(3)) {
        prop_assert_eq!(p.reflected().reflected(), p);
    }

    #[test]
    fn concat_keeps_both_halves(p in path_strategy(2), q in path_strategy(2)) {
        let end = p.end().unwrap().clone();
        let gap = p.end_values().unwrap();
        // Lift q so it starts where p ends.
        let init0 = q.initial_values().to_vec();
        let lifted = PiecewisePath::new(
            q.start().clone(),
            q.breakpoints().to_vec(),
            q.end().cloned(),
            gap.clone(),
            q.slopes().to_vec(),
        ).unwrap().shifted(&end);
        let joined = p.concat(&lifted).unwrap();
        prop_assert_eq!(joined.eval(p.start()).unwrap(), p.eval(p.start()).unwrap());
        let q_end = lifted.end().unwrap().clone();
        let shift: Vec<Rational> = gap.iter().zip(&init0).map(|(g, i)| g - i).collect();
        let expected: Vec<Rational> = q.end_values().unwrap().iter().zip(&shift).map(|(v, s)| v + s).collect();
        prop_assert_eq!(joined.eval(&q_end).unwrap(), expected);
    }

    #[test]
    fn step_integral_is_additive(p in path_strategy(1), w in prop::collection::vec(small_rat(), 4)) {
        let weights: Vec<Rational> = (0..p.segment_count()).map(|i| w[i % w.len()].clone()).collect();
        let end = p.end().unwrap().clone();
        let mid = (p.start() + &end) / int(2);
        let a = p.integrate_step(&weights, &mid).unwrap();
        let b = p.integrate_step(&weights, &end).unwrap();
        let shifted = p.shifted(&int(5));
        let c = shifted.integrate_step(&weights, &(&end + int(5))).unwrap();
        prop_assert_eq!(&b, &c);
        if weights.iter().all(|x| *x >= Rational::from_integer(0.into())) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn quadrilateral_rate_is_periodic(m in 1usize..=4, n in 1usize..=4, periods in 1usize..=4, scale in 1i64..=5) {
        let r = 1 + (m.min(n) - 1) / 2;
        let t = quadrilateral_periodic(m, n, r, &int(scale), periods).unwrap();
        let mn = int((m * n) as i64);
        let expected = &mn - &mn * rat(r as i64, (m + n) as i64);
        for k in 1..=periods {
            prop_assert_eq!(average_rate(&t, &int(scale * k as i64)).unwrap(), expected.clone());
        }
    }

    #[test]
    fn rate_is_bounded_by_mn(m in 1usize..=3, n in 1usize..=3, s in 1i64..=60) {
        let r = m.max(n);
        let t = pulse_template(m, n, r, &TauChoice::Min, &TauChoice::Min, 4).unwrap();
        let end = t.path().end().unwrap().clone();
        let at = &end * rat(s, 60);
        let integral = RateIntegral::new(&t).unwrap();
        let v = integral.average(&at).unwrap();
        prop_assert!(v >= Rational::from_integer(0.into()));
        prop_assert!(v <= int((m * n) as i64));
    }

    #[test]
    fn slope_perturbations_are_rejected(m in 1usize..=3, n in 1usize..=3, comp in 0usize..6, seg in 0usize..2) {
        let r = m.min(n);
        let t = quadrilateral_periodic(m, n, r, &int(1), 1).unwrap();
        let comp = comp % (m + n);
        let bumped = perturb_slope(t.path(), seg, comp, &rat((m + n) as i64, (2 * m * n) as i64));
        prop_assert!(!find_violations(m, n, &bumped).is_empty());
    }

    #[test]
    fn dual_reflection_round_trips(m in 1usize..=3, n in 1usize..=3, r in 1usize..=3) {
        prop_assume!(r <= m.max(n));
        let t = pulse_template(m, n, r, &TauChoice::Min, &TauChoice::Min, 3).unwrap();
        let back = reflect_dual(&reflect_dual(&t).unwrap()).unwrap();
        prop_assert_eq!(back.path(), t.path());
    }
}

#[test]
fn zero_template_rate_everywhere() {
    let t = zero_template(3, 2).unwrap();
    for big_t in [rat(1, 3), int(2), int(1000)] {
        assert_eq!(average_rate(&t, &big_t).unwrap(), int(6));
    }
    assert!(validate(3, 2, t.path().clone()).is_ok());
}
