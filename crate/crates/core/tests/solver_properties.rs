use glp_core::lattice::{path_weight, SelfAvoidingPath, Vertex};
use glp_core::solver::max_weight_path;
use glp_core::weights::{DistributionSpec, TruncationLevel, WeightField};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (0.05f64..0.95).prop_map(DistributionSpec::bernoulli),
        (-1.0f64..1.0, 0.2f64..3.0).prop_map(|(mu, s)| DistributionSpec::gaussian(mu, s)),
        (0.5f64..3.0, 1.0f64..12.0, 0.05f64..0.6).prop_map(|(a, b, q)| DistributionSpec::two_point(a, b, q)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The returned path is a valid SAW from the origin whose weight is the value.
    #[test]
    fn returned_path_is_consistent(spec in law(), dim in 1usize..=3, n in 1usize..=7, seed in any::<u64>(), m in 0.0f64..6.0) {
        let field = WeightField::new(spec, dim, seed).unwrap();
        let trunc = TruncationLevel::new(m).unwrap();
        let r = max_weight_path(&field, n, trunc).unwrap();
        prop_assert_eq!(r.path.len(), n);
        prop_assert_eq!(r.path.first(), &Vertex::origin(dim));
        let rebuilt = SelfAvoidingPath::try_from_vertices(r.path.vertices().to_vec());
        prop_assert!(rebuilt.is_ok());
        prop_assert_eq!(path_weight(&r.path, &field, trunc), r.value);
    }

    /// Raising the truncation level never increases the truncated maximum.
    #[test]
    fn truncated_value_is_monotone(spec in law(), n in 2usize..=6, seed in any::<u64>(), m in 0.0f64..4.0, dm in 0.0f64..4.0) {
        let field = WeightField::new(spec, 2, seed).unwrap();
        let low = max_weight_path(&field, n, TruncationLevel::new(m).unwrap()).unwrap();
        let high = max_weight_path(&field, n, TruncationLevel::new(m + dm).unwrap()).unwrap();
        let none = max_weight_path(&field, n, TruncationLevel::NONE).unwrap();
        prop_assert!(high.value <= low.value);
        prop_assert!(none.value <= high.value);
    }
}
