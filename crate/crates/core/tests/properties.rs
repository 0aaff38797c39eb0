use proptest::prelude::*;

use wclmmse::diagnostics::analytic_mse;
use wclmmse::filters::{self, FilterKind, SpectralCache};
use wclmmse::linalg::condition_number;
use wclmmse::model::{synthetic_model, Spectrum};
use wclmmse::Mat;

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..3.0, 3..9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn condition_number_is_scale_invariant(values in spectrum(), seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let model = synthetic_model(1, values.len() - 1, &Spectrum::Explicit(values), seed).unwrap();
        let c = condition_number(model.c_y()).unwrap();
        let scaled: Mat = model.c_y() * scale;
        prop_assert!((condition_number(&scaled).unwrap() - c).abs() <= 1e-8 * c);
    }

    #[test]
    fn truncated_filters_never_beat_wiener(values in spectrum(), seed in any::<u64>()) {
        let m = values.len() - 1;
        let model = synthetic_model(1, m, &Spectrum::Explicit(values), seed).unwrap();
        let cache = SpectralCache::new(&model).unwrap();
        let opt = analytic_mse(&model, &filters::wiener(&model).unwrap()).unwrap();
        for kind in [FilterKind::Lrw, FilterKind::Csw, FilterKind::Jpc, FilterKind::Lsjpc] {
            for l in 1..=m {
                if let Ok(f) = filters::build(kind, &cache, &model, l) {
                    prop_assert!(analytic_mse(&model, &f).unwrap() >= opt - 1e-10);
                }
            }
        }
    }

    #[test]
    fn jpc_mse_non_increasing_in_l(values in spectrum(), seed in any::<u64>()) {
        // nested prefilters: V_YL spans grow with l
        let m = values.len() - 1;
        let model = synthetic_model(1, m, &Spectrum::Explicit(values), seed).unwrap();
        let cache = SpectralCache::new(&model).unwrap();
        let mses: Vec<f64> = (1..=m)
            .filter_map(|l| filters::jpc_with(&cache, &model, l).ok())
            .map(|f| analytic_mse(&model, &f).unwrap())
            .collect();
        for w in mses.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
    }
}
