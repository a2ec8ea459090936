use std::f64::consts::PI;

use slitwall::entangle::link_to_slit_model;
use slitwall::grid::{GridSpec, Representation};
use slitwall::observables::{branch_momentum_distribution, classify_path, PathLabel};
use slitwall::slits::free_propagate;
use slitwall::{
    build_state, conditional_momentum, screen_distribution, visibility, PathInferenceRule,
    Pipeline, SlitModel, StateSpec, WaveFunction,
};

fn grid() -> GridSpec {
    GridSpec::new(2.0 * PI * 64.0, 32768).unwrap()
}

fn gaussian(center: f64, sigma: f64) -> WaveFunction {
    build_state(&StateSpec::GaussianPosition { center, sigma, chirp: 0.0 }, grid()).unwrap()
}

fn partition(k: f64, tau: f64, tau_prime: f64) -> Pipeline {
    Pipeline {
        mass_particle: 1.0,
        tau,
        tau_prime,
        k,
        slits: SlitModel::Partition { x_divide: 0.0 },
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_kick_reproduces_the_undisturbed_pattern() {
    let particle = gaussian(0.0, 2.0);
    let pair = partition(0.0, 1.0, 4.0).run(&particle, &gaussian(0.0, 0.5)).unwrap();
    assert_eq!(pair.branch1.wall, pair.branch2.wall);
    assert!((visibility(&pair.initial_wall, 0.0).unwrap().visibility - 1.0).abs() < 1e-12);
    // S₁ + S₂ = 1, so the two branches recombine into the freely evolved packet
    let free = free_propagate(&particle, 1.0, 5.0).unwrap();
    let total = free.norm_sqr();
    let expected: Vec<f64> = free.density().iter().map(|d| d / total).collect();
    assert!(max_abs_diff(&screen_distribution(&pair).unwrap(), &expected) < 1e-10);
}

#[test]
fn disjoint_wall_supports_erase_the_fringes() {
    let wall = build_state(&StateSpec::TopHatMomentum { center: 0.0, width: 1.9 }, grid()).unwrap();
    let pair = partition(1.0, 1.0, 4.0).run(&gaussian(0.0, 2.0), &wall).unwrap();
    let a = &pair.branch1.particle;
    let b = &pair.branch2.particle;
    let mix: Vec<f64> = a.density().iter().zip(b.density()).map(|(x, y)| x + y).collect();
    let total: f64 = mix.iter().sum::<f64>() * a.measure();
    let mix: Vec<f64> = mix.iter().map(|m| m / total).collect();
    assert!(max_abs_diff(&screen_distribution(&pair).unwrap(), &mix) < 1e-14);

    // any q: a mixture of the two shifted lobes
    let lobe1 = branch_momentum_distribution(&pair, PathLabel::Slit1).unwrap();
    let lobe2 = branch_momentum_distribution(&pair, PathLabel::Slit2).unwrap();
    for q in [-3.0, 0.0, 2.5] {
        let j = grid().nearest_index(Representation::Position, q).unwrap();
        let (w1, w2) = (a.amplitudes()[j].norm_sqr(), b.amplitudes()[j].norm_sqr());
        let expected: Vec<f64> = lobe1.iter().zip(&lobe2).map(|(x, y)| (w1 * x + w2 * y) / (w1 + w2)).collect();
        assert!(max_abs_diff(&conditional_momentum(&pair, q).unwrap(), &expected) < 1e-10);
    }
}

#[test]
fn single_branch_conditional_is_the_shifted_wall() {
    // no flight after the apertures, so at q inside slit 1 only branch 1 exists
    let pipeline = Pipeline {
        mass_particle: 1.0,
        tau: 0.0,
        tau_prime: 0.0,
        k: 1.0,
        slits: SlitModel::Aperture { d: 4.0, w: 1.0 },
    };
    let pair = pipeline.run(&gaussian(0.0, 3.0), &gaussian(0.0, 0.7)).unwrap();
    let j = grid().nearest_index(Representation::Position, 2.0).unwrap();
    assert!(pair.branch2.particle.amplitudes()[j].norm() < 1e-15);
    let expected = branch_momentum_distribution(&pair, PathLabel::Slit1).unwrap();
    assert!(max_abs_diff(&conditional_momentum(&pair, 2.0).unwrap(), &expected) < 1e-12);
}

// maxima over a window of ±half samples, so edge-diffraction ripples are skipped
fn local_maxima(q: &[f64], density: &[f64], range: f64, half: usize) -> Vec<f64> {
    (half..density.len() - half)
        .filter(|&i| {
            q[i].abs() < range
                && density[i - half..=i + half].iter().all(|&d| d <= density[i])
                && density[i] > density[i - 1]
        })
        .map(|i| {
            // parabolic refinement between neighbouring samples
            let (a, b, c) = (density[i - 1], density[i], density[i + 1]);
            let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
            q[i] + shift * (q[1] - q[0])
        })
        .collect()
}

#[test]
fn aperture_fringe_spacing_matches_two_source_formula() {
    let (d, tau_prime, mass) = (4.0, 10.0, 1.0);
    let pipeline = Pipeline {
        mass_particle: mass,
        tau: 0.0,
        tau_prime,
        k: 0.0,
        slits: SlitModel::Aperture { d, w: 0.5 },
    };
    let pair = pipeline.run(&gaussian(0.0, 4.0), &gaussian(0.0, 0.3)).unwrap();
    let density = screen_distribution(&pair).unwrap();
    let spacing = 2.0 * PI * tau_prime / (mass * d);
    let half = (0.25 * spacing / grid().spacing()) as usize;
    // hard slit edges leave fine aliased ripples on the fringes, so average them out
    let box_half = half / 2;
    let smooth: Vec<f64> = (0..density.len())
        .map(|i| {
            let lo = i.saturating_sub(box_half);
            let hi = (i + box_half).min(density.len() - 1);
            density[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let peaks = local_maxima(&grid().positions(), &smooth, 25.0, half);
    assert!(peaks.len() >= 3, "{peaks:?}");
    let central = peaks.iter().cloned().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap();
    assert!(central.abs() < 0.01 * spacing, "central maximum at {central}");
    for w in peaks.windows(2) {
        assert!(((w[1] - w[0]) / spacing - 1.0).abs() < 0.02, "{} vs {spacing}", w[1] - w[0]);
    }
}

#[test]
fn kick_reduces_fringe_contrast_by_the_visibility() {
    // with a partial kick the interference term is scaled by V e^{iα}
    let particle = gaussian(0.0, 2.0);
    let wall = gaussian(0.0, 0.5);
    let pair = partition(1.0, 1.0, 4.0).run(&particle, &wall).unwrap();
    let v = visibility(&wall, 1.0).unwrap();
    let (a, b) = (&pair.branch1.particle, &pair.branch2.particle);
    let expected: Vec<f64> = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.norm_sqr() + y.norm_sqr() + 2.0 * (x.conj() * y * v.overlap_position).re)
        .collect();
    let total: f64 = expected.iter().sum::<f64>() * a.measure();
    let expected: Vec<f64> = expected.iter().map(|e| e / total).collect();
    assert!(max_abs_diff(&screen_distribution(&pair).unwrap(), &expected) < 1e-12);
}

#[test]
fn window_rule_examples() {
    let rule = PathInferenceRule::new(0.3, 1.0).unwrap();
    assert_eq!(classify_path(1.3, &rule), PathLabel::Slit1);
    assert_eq!(classify_path(-0.7, &rule), PathLabel::Slit2);
    assert_eq!(classify_path(3.3, &rule), PathLabel::Ambiguous);
    assert_eq!(classify_path(0.3, &rule), PathLabel::Ambiguous);
    assert!(PathInferenceRule::new(f64::NAN, 1.0).is_err());
}

#[test]
fn linked_two_branch_state_reproduces_the_grid_visibility() {
    let particle = gaussian(0.0, 2.0);
    for (wall, k, expected) in [
        (gaussian(0.0, 1.0), 1.0, Some((-2.0f64).exp())),
        (gaussian(0.0, 1.0), 0.0, Some(1.0)),
        (build_state(&StateSpec::TopHatMomentum { center: 0.0, width: 1.5 }, grid()).unwrap(), 1.0, Some(0.0)),
        (gaussian(0.4, 0.6), 0.75, None),
    ] {
        let pair = partition(k, 1.0, 3.0).run(&particle, &wall).unwrap();
        let linked = link_to_slit_model(&pair).unwrap();
        let grid_v = visibility(&wall, k).unwrap().visibility;
        assert!((linked.visibility_factor() - grid_v).abs() < 1e-9);
        if let Some(e) = expected {
            assert!((linked.visibility_factor() - e).abs() < 1e-6, "{} vs {e}", linked.visibility_factor());
        }
        assert!((linked.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
