use rand::Rng;
use slconvex_core::convexity::{GLPLUS_ROUTES, SL2_ROUTES};
use slconvex_core::energy::{catalog, spec_from_definition};
use slconvex_core::isochoric::IsochoricEnergy;
use slconvex_core::sampling::{random_sl2, sample_rng};
use slconvex_core::{analyze, AnalysisConfig, ConvexityReport, Domain, Verdict};

/// Seeded smooth shear profiles: positive polynomials, their negations and
/// logarithmic concavifications.
fn random_phis(seed: u64, n: usize) -> Vec<String> {
    (0..n)
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let mut terms = Vec::new();
            for p in 1..=4 {
                if rng.random_bool(0.6) {
                    terms.push(format!("{:.3}*gamma^{p}", rng.random_range(0.5..2.0)));
                }
            }
            let poly = if terms.is_empty() {
                "gamma^2".to_string()
            } else {
                terms.join(" + ")
            };
            match k % 3 {
                0 => format!("phi: {poly}"),
                1 => format!("phi: -({poly})"),
                _ => format!("phi: log(1 + {poly})"),
            }
        })
        .collect()
}

fn assert_agree(r: &ConvexityReport, routes: &[&str], band: f64) {
    assert!(
        r.hard_disagreements().is_empty(),
        "{}: {:?}",
        r.energy_name,
        r.diagnostics
    );
    let first = r.verdict(routes[0]).unwrap();
    for route in routes {
        let v = r.verdict(route).unwrap();
        if v != first {
            let slack = r
                .grid_stats
                .iter()
                .filter(|(k, _)| k.starts_with(route))
                .map(|(_, s)| s.value.abs());
            assert!(
                r.is_boundary(route) || slack.fold(f64::INFINITY, f64::min) <= band,
                "{}: {route} = {v:?} vs {first:?}; {:?}",
                r.energy_name,
                r.diagnostics
            );
        }
    }
}

#[test]
fn sl2_routes_agree_on_catalog() {
    let cfg = AnalysisConfig::default();
    for e in catalog() {
        let r = analyze(&e.spec, Domain::Sl2, &cfg).unwrap();
        assert_agree(&r, &SL2_ROUTES, 1e-7);
        let expected = if e.expected.sl2_rank_one_convex {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
        assert_eq!(r.verdict("rank_one_oracle"), Some(expected), "{}", e.spec.name);
        assert_eq!(r.verdict("mielke_polyconvexity"), Some(expected), "{}", e.spec.name);
    }
}

#[test]
fn sl2_routes_agree_on_random_profiles() {
    let cfg = AnalysisConfig::default();
    for (k, src) in random_phis(7, 20).iter().enumerate() {
        let spec = spec_from_definition(&format!("random-{k}"), src, Domain::Sl2).unwrap();
        let r = analyze(&spec, Domain::Sl2, &cfg).unwrap();
        assert_agree(&r, &SL2_ROUTES, 1e-7);
        let expected = if k % 3 == 0 { Verdict::Holds } else { Verdict::Fails };
        assert_eq!(r.verdict("dfz"), Some(expected), "{src}");
    }
}

#[test]
fn glplus_routes_agree_on_catalog() {
    let cfg = AnalysisConfig::default();
    let mut sl2_only = Vec::new();
    for e in catalog() {
        let r = analyze(&e.spec, Domain::GlPlus2, &cfg).unwrap();
        assert_agree(&r, &GLPLUS_ROUTES, 1e-7);
        let gl = r.verdict("glplus_rank_one_oracle") == Some(Verdict::Holds);
        assert_eq!(gl, e.expected.glplus_rank_one_convex, "{}", e.spec.name);
        let sl = analyze(&e.spec, Domain::Sl2, &cfg).unwrap().verdict("rank_one_oracle") == Some(Verdict::Holds);
        assert!(!(gl && !sl), "{} passes on GL+(2) but fails on SL(2)", e.spec.name);
        if sl && !gl {
            sl2_only.push(e.family);
        }
    }
    sl2_only.dedup();
    assert_eq!(sl2_only, ["counterexample"]);
}

#[test]
fn restriction_inverts_lift() {
    let cfg = AnalysisConfig::default();
    for e in catalog() {
        let w = e.spec.on_domain(Domain::Sl2);
        let back = IsochoricEnergy::lift(&w).restrict().unwrap();
        for k in 0..1000 {
            let f = random_sl2(&mut sample_rng(cfg.seed, k), cfg.log_lambda_max);
            let (a, b) = (w.eval(&f).unwrap(), back.eval(&f).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{}: {a} vs {b}", e.spec.name);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let cfg = AnalysisConfig::default().with_seed(11);
    for name in ["phi-sqrt", "counterexample-iso"] {
        let e = slconvex_core::energy::lookup(name).unwrap();
        let a = analyze(&e.spec, e.spec.domain(), &cfg).unwrap();
        let b = analyze(&e.spec, e.spec.domain(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
