use proptest::prelude::*;

use systl::generators::{self, gen_csaszar, perturb};
use systl::homology::{build_basis, cycle_class, oracle_is_separating, EdgeCycle};
use systl::mesh::{refine, EmbeddedMesh};
use systl::sweep::{coarea_check, extract_level_with, Axis, ComponentKind};
use systl::systole::{brute_force_systole, shortest_nonseparating};

fn jittered_csaszar(seed: u64, fraction: f64) -> EmbeddedMesh {
    perturb(&gen_csaszar(), fraction, seed).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn systole_matches_exhaustive_search(seed in any::<u64>(), frac in 0.0f64..0.05) {
        let m = jittered_csaszar(seed, frac);
        let fast = shortest_nonseparating(&m).unwrap();
        let slow = brute_force_systole(&m).unwrap();
        prop_assert!(close(fast.length, slow.length, 1e-12), "{} vs {}", fast.length, slow.length);
        prop_assert!(!oracle_is_separating(&m, &fast.witness).unwrap());
        prop_assert!(fast.witness.is_simple());
    }

    #[test]
    fn systole_scales_linearly(seed in any::<u64>(), s in 0.1f64..10.0) {
        let m = jittered_csaszar(seed, 0.04);
        let a = shortest_nonseparating(&m).unwrap().length;
        let b = shortest_nonseparating(&m.scaled(s).unwrap()).unwrap().length;
        prop_assert!(close(b, s * a, 1e-12), "{b} vs {}", s * a);
    }

    #[test]
    fn refinement_never_lengthens(seed in any::<u64>()) {
        let m = jittered_csaszar(seed, 0.04);
        let a = shortest_nonseparating(&m).unwrap().length;
        let r = refine(&m, 1).unwrap();
        let b = shortest_nonseparating(&r).unwrap().length;
        prop_assert!(b <= a + 1e-12);
        prop_assert!(close(r.area(), m.area(), 1e-12));
    }

    #[test]
    fn coarea_is_bounded_by_area(seed in any::<u64>(), frac in 0.0f64..0.3, y in any::<bool>()) {
        let m = perturb(&generators::gen_handle_disk(0.2, 0).unwrap(), frac, seed).unwrap();
        let axis = if y { Axis::Y } else { Axis::X };
        let c = coarea_check(&m, axis);
        prop_assert!(c.integral_rhs <= c.area_lhs + 1e-9);
    }

    #[test]
    fn level_loops_match_companion_cycle(t in -0.9f64..0.9, y in any::<bool>()) {
        let m = generators::gen_handle_disk(0.2, 1).unwrap();
        let basis = build_basis(&m).unwrap();
        let axis = if y { Axis::Y } else { Axis::X };
        let slice = extract_level_with(&m, Some(&basis), axis, t).unwrap();
        for comp in slice.components.iter().filter(|c| c.kind == ComponentKind::Loop) {
            // push the loop to the high side instead of the low side
            let mut walk: Vec<usize> = comp
                .crossings
                .iter()
                .map(|c| {
                    let [u, v] = m.edge(c.edge);
                    if c.side == u { v } else { u }
                })
                .collect();
            walk.dedup();
            while walk.len() > 1 && walk.first() == walk.last() {
                walk.pop();
            }
            let class = comp.class.unwrap();
            if walk.len() < 2 {
                prop_assert!(class.is_zero());
                continue;
            }
            let companion = EdgeCycle::from_vertices(&m, &walk).unwrap();
            prop_assert_eq!(cycle_class(&basis, &companion).unwrap(), class);
        }
    }
}
