use mstlab::atpc::*;
use mstlab::protocol::library::Constant;
use mstlab::protocol::*;
use mstlab::sketch::{default_rounds, ForestSketchBank, L0Params, L0Sketch};
use mstlab::stream::*;
use mstlab::urmin::{build_ur_instance, ur_min_dec, verify_structure};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = AtpcParams> {
    (1u32..=3, 1u32..=3).prop_map(|(d, w)| AtpcParams::new(d, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn structure_holds(p in params(), seed in any::<u64>()) {
        let t = sample_instance(p, seed).unwrap();
        prop_assert!(verify_structure(&t).pass());
        let inst = build_ur_instance(&t).unwrap();
        prop_assert_eq!(ur_min_dec(&inst).unwrap(), answer(&t));
    }

    #[test]
    fn views_determine_the_answer(p in params(), seed in any::<u64>()) {
        let t = sample_instance(p, seed).unwrap();
        let (a, b) = derive_views(&t);
        prop_assert_eq!(joint_solve(&a, &b).unwrap(), (target(&t), answer(&t)));
        prop_assert_eq!(AtpcTree::from_text(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn enumeration_index_is_a_bijection(d in 1u32..=2, w in 1u32..=3, idx in any::<u64>()) {
        let p = AtpcParams::new(d, w).unwrap();
        let size = support_size(p).unwrap();
        let i = idx as u128 % size;
        let t = instance_at(p, i).unwrap();
        prop_assert_eq!(enumerate_instances(p).unwrap().nth(i as usize).unwrap(), t);
    }

    #[test]
    fn mst_weight_identity(k in 1u32..=6, p in params(), seed in any::<u64>()) {
        let b = sample_batch(k, p, seed).unwrap();
        let s = build_mst_stream(&b).unwrap();
        let weight = mst_oracle(&materialize(&s).unwrap()).unwrap();
        prop_assert_eq!(weight, expected_mst_weight(&b).unwrap());
        prop_assert_eq!(weight >= s.threshold, decision_ground_truth(&b));
        prop_assert!(s.inserts_precede_deletes());
        let n2 = s.n as u64 * s.n as u64;
        prop_assert!(s.ops.len() as u64 <= 3 * n2 && s.max_weight() <= 2 * n2);
        prop_assert_eq!(parse_stream(&serialize_stream(&s)).unwrap(), s);
    }

    #[test]
    fn party_segments_concatenate_to_the_stream(k in 1u32..=4, p in params(), seed in any::<u64>()) {
        let b = sample_batch(k, p, seed).unwrap();
        let mut ops = preamble_ops(k, p, b.hint).unwrap();
        let views: Vec<_> = b.trees.iter().map(derive_views).collect();
        for (j, (a, _)) in views.iter().enumerate() {
            ops.extend(insert_ops(j as u32 + 1, k, p, a).unwrap());
        }
        for (j, (_, bv)) in views.iter().enumerate() {
            ops.extend(delete_ops(j as u32 + 1, k, p, bv).unwrap());
        }
        prop_assert_eq!(ops, build_mst_stream(&b).unwrap().ops);
    }

    #[test]
    fn forest_bank_is_linear(n in 2u32..12, edges in prop::collection::vec((1u32..12, 1u32..12, -2i64..=2), 0..40), seed in any::<u64>()) {
        let mut whole = ForestSketchBank::new(n, default_rounds(n), 0.1, seed).unwrap();
        let mut undo = whole.clone();
        for &(u, v, d) in &edges {
            let (u, v) = (u.min(n), v.min(n));
            if u == v || d == 0 {
                continue;
            }
            let plans = whole.plans(u.min(v), u.max(v)).unwrap();
            whole.apply_edge(u.min(v), u.max(v), d, &plans);
            undo.apply_edge(u.min(v), u.max(v), d, &plans);
            undo.apply_edge(u.min(v), u.max(v), -d, &plans);
        }
        prop_assert!(undo.is_zero());
        let mut bytes = Vec::new();
        whole.write_bytes(&mut bytes);
        let mut back = ForestSketchBank::new(n, default_rounds(n), 0.1, seed).unwrap();
        prop_assert!(back.read_bytes(&bytes).unwrap().is_empty());
        prop_assert_eq!(back, whole);
    }

    #[test]
    fn sketch_negation_inverts(ups in prop::collection::vec((0u64..500, -4i64..=4), 0..50), seed in any::<u64>()) {
        let params = L0Params::new(500, 0.05, seed).unwrap();
        let mut s = L0Sketch::new(params);
        for &(i, d) in &ups {
            s.update(i, d).unwrap();
        }
        let mut neg = s.clone();
        neg.negate();
        prop_assert!(s.merged(&neg).unwrap().is_zero());
    }

    #[test]
    fn info_inequalities(a in prop::collection::vec(0.0f64..1.0, 6), b in prop::collection::vec(0.01f64..1.0, 6)) {
        prop_assume!(a.iter().sum::<f64>() > 1e-6);
        let mu = Joint::from_weights(vec![2, 3], a).unwrap();
        let nu = Joint::from_weights(vec![2, 3], b).unwrap();
        let kl = kl_divergence(mu.probs(), nu.probs()).unwrap().finite().unwrap();
        let tv = tvd(mu.probs(), nu.probs()).unwrap();
        prop_assert!(kl >= -1e-12);
        prop_assert!(tv <= pinsker_bound(kl) + 1e-12);
        prop_assert!(tv <= tvd_chain_rhs(&mu, &nu).unwrap() + 1e-12);
        prop_assert!(mutual_information(&mu, &[0], &[1], &[]).unwrap() >= -1e-12);
        prop_assert!(mu.entropy_of(&[0, 1]).unwrap() <= mu.entropy_of(&[0]).unwrap() + mu.entropy_of(&[1]).unwrap() + 1e-12);
    }
}

#[test]
fn constant_protocols_score_one_half_on_balanced_support() {
    for (d, w) in [(1, 2), (1, 3), (2, 2)] {
        let table = atpc_table(AtpcParams::new(d, w).unwrap()).unwrap();
        for v in [false, true] {
            let c = Constant::<AliceView, BobView>::new(Arity::TwoParty, d, v);
            assert_eq!(exact_success(&c, &table, Caps::default()).unwrap().success, q_frac(1, 2));
        }
    }
}
