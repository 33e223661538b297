use boxdual::{BoxDomain, InverseProblem, Matrix, NoisyInverseProblem};
use boxdual_cli::format::{parse_problem, render_problem, ProblemFile};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn problem() -> impl Strategy<Value = ProblemFile> {
    (1usize..=4, 1usize..=5, any::<bool>()).prop_flat_map(|(m, n, noisy)| {
        (
            prop::collection::vec(finite(), m * n),
            prop::collection::vec((finite(), 0.0..1e6f64), n),
            prop::collection::vec(finite(), m),
            prop::collection::vec((-10.0..0.0f64, 0.0..10.0f64), m),
        )
            .prop_map(move |(a, bounds, y, noise)| {
                let (lo, hi): (Vec<f64>, Vec<f64>) =
                    bounds.into_iter().map(|(a, d)| (a, if (a + d).is_finite() { a + d } else { a })).unzip();
                let p = InverseProblem::new(Matrix::new(m, n, a).unwrap(), y, BoxDomain::new(lo, hi).unwrap()).unwrap();
                if noisy {
                    let (c, d) = noise.into_iter().unzip();
                    ProblemFile::Noisy(NoisyInverseProblem::new(p, BoxDomain::new(c, d).unwrap()).unwrap())
                } else {
                    ProblemFile::Clean(p)
                }
            })
    })
}

fn bits(p: &ProblemFile) -> Vec<u64> {
    let base = p.base();
    let mut v: Vec<u64> = base.matrix().as_slice().iter().map(|x| x.to_bits()).collect();
    v.extend(base.data().iter().map(|x| x.to_bits()));
    v.extend(base.domain().lower().iter().chain(base.domain().upper()).map(|x| x.to_bits()));
    if let ProblemFile::Noisy(q) = p {
        v.extend(q.noise_domain().lower().iter().chain(q.noise_domain().upper()).map(|x| x.to_bits()));
    }
    v
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(p in problem()) {
        let text = render_problem(&p);
        let back = parse_problem(&text).unwrap();
        prop_assert_eq!(bits(&back), bits(&p));
        prop_assert_eq!(render_problem(&back), text);
    }
}
