//! The nine acceptance criteria, each against oracles written here.

use cosmic_area::congruence::{
    integrate_raychaudhuri, monotone_quotient_check, FlrwCell, GeneralizedFlrw, RicciProfile,
    ScaleProfile,
};
use cosmic_area::counterexample::{divergence_report, CounterexampleInstance};
use cosmic_area::initial_data::{Cell, InitialDataSet};
use cosmic_area::integral_bounds::{
    area_bound_exact, area_bound_jensen, tg_pointwise_area, volume_bound_exact, AreaBoundReport,
    VolumeBoundReport,
};
use cosmic_area::level_sets::{generalized_area, left_limsup, AreaHistory, Schedule};
use cosmic_area::model_geometry::ModelGeometry;
use cosmic_area::verify::{run_all, VerifyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIMES: [f64; 3] = [0.1, 1.0, 5.0];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Hand-rolled profile: `a + b t` or `s (1 + r t)^q`.
#[derive(Clone, Copy)]
enum Shape {
    Line(f64, f64),
    Power(f64, f64, f64),
}

impl Shape {
    fn value(self, t: f64) -> f64 {
        match self {
            Shape::Line(a, b) => a + b * t,
            Shape::Power(s, r, q) => s * (1.0 + r * t).powf(q),
        }
    }

    fn rate(self, t: f64) -> f64 {
        match self {
            Shape::Line(_, b) => b,
            Shape::Power(s, r, q) => s * q * r * (1.0 + r * t).powf(q - 1.0),
        }
    }

    fn profile(self) -> ScaleProfile {
        match self {
            Shape::Line(a, b) => ScaleProfile::linear(a, b),
            Shape::Power(s, r, q) => ScaleProfile::power(s, r, q),
        }
    }
}

struct Oracle {
    n: u32,
    cells: Vec<(f64, Shape, f64, usize)>, // weight, shape, u for |K|, part
}

impl Oracle {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = [2, 3, 4][rng.gen_range(0..3)];
        let count = rng.gen_range(1..=50);
        let cells = (0..count)
            .map(|_| {
                let w = rng.gen_range(0.1..1.5);
                let a = rng.gen_range(0.5..2.5);
                let shape = if rng.gen_bool(0.5) {
                    Shape::Line(a, rng.gen_range(-0.8 * a / 5.0..1.5))
                } else {
                    Shape::Power(a, rng.gen_range(0.0..2.0), rng.gen_range(0.1..=1.0))
                };
                (w, shape, rng.gen_range(0.0..1.0), rng.gen_range(0..3))
            })
            .collect();
        Self { n, cells }
    }

    fn spacetime(&self) -> GeneralizedFlrw {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, &(w, s, _, _))| FlrwCell::new(format!("x{i}"), w, s.profile()))
            .collect();
        GeneralizedFlrw::new(self.n, cells).unwrap()
    }

    /// `(area, H, |K|)` per cell on the initial slice.
    fn initial(&self) -> Vec<(f64, f64, f64)> {
        let nf = f64::from(self.n);
        self.cells
            .iter()
            .map(|&(w, s, u, _)| {
                let h = nf * s.rate(0.0) / s.value(0.0);
                (
                    w * s.value(0.0).powi(self.n as i32),
                    h,
                    h.abs() / nf * (1.0 + u),
                )
            })
            .collect()
    }

    fn data(&self) -> InitialDataSet {
        let cells = self
            .initial()
            .into_iter()
            .enumerate()
            .map(|(i, (area, h, k))| Cell::new(format!("x{i}"), area, h).with_k(k))
            .collect();
        InitialDataSet::new(self.n, cells, "oracle").unwrap()
    }

    fn area(&self, t: f64, part: Option<usize>) -> f64 {
        self.cells
            .iter()
            .filter(|c| part.is_none_or(|p| c.3 == p))
            .map(|&(w, s, _, _)| w * s.value(t).powi(self.n as i32))
            .sum()
    }

    fn exact_bound(&self, t: f64, part: Option<usize>) -> f64 {
        let nf = f64::from(self.n);
        self.initial()
            .iter()
            .zip(&self.cells)
            .filter(|(_, c)| part.is_none_or(|p| c.3 == p))
            .map(|(&(a, h, _), _)| a * (h.max(0.0) * t / nf + 1.0).powi(self.n as i32))
            .sum()
    }

    fn jensen_h(&self, t: f64) -> f64 {
        let nf = f64::from(self.n);
        let init = self.initial();
        let hn: f64 = init
            .iter()
            .map(|&(a, h, _)| a * h.abs().powi(self.n as i32))
            .sum();
        let area: f64 = init.iter().map(|c| c.0).sum();
        2f64.powi(self.n as i32 - 1) * ((t / nf).powi(self.n as i32) * hn + area)
    }
}

fn oracles() -> Vec<Oracle> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    (0..25).map(|_| Oracle::random(&mut rng)).collect()
}

fn criterion_1() -> (bool, String) {
    let err = |step: f64| {
        let traj = integrate_raychaudhuri(3.0, &RicciProfile::Zero, 3, 2.0, step).unwrap();
        assert_eq!(traj.last().tau, 2.0);
        traj.samples
            .iter()
            .map(|s| rel(s.theta, 3.0 / (s.tau + 1.0)).max(rel(s.area, (1.0 + s.tau).powi(3))))
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(1e-3), err(5e-4));
    (
        coarse <= 1e-6 && coarse / fine >= 12.0,
        format!("error {coarse:.3e}, halving ratio {:.2}", coarse / fine),
    )
}

fn criterion_2(insts: &[Oracle]) -> (bool, String) {
    let mut worst = f64::INFINITY;
    let mut agree: f64 = 0.0;
    let mut sec = true;
    let grid: Vec<f64> = (0..=50).map(|i| 0.1 * f64::from(i)).collect();
    for o in insts {
        let st = o.spacetime();
        let data = o.data();
        sec &= st.satisfies_sec(&grid).unwrap();
        for t in TIMES {
            let area = st.total_area(t).unwrap();
            let bound = area_bound_exact(&data, t).unwrap();
            agree = agree
                .max(rel(area, o.area(t, None)))
                .max(rel(bound, o.exact_bound(t, None)));
            worst = worst.min((bound - area) / bound);
        }
    }
    (
        sec && worst >= -1e-9 && agree <= 1e-12,
        format!("min relative margin {worst:.3e}, oracle agreement {agree:.3e}"),
    )
}

fn criterion_3(insts: &[Oracle]) -> (bool, String) {
    let mut ok = true;
    let mut binomial: f64 = 0.0;
    let mut agree: f64 = 0.0;
    let le = |a: f64, b: f64| a <= b + 1e-9 * b.abs().max(1.0);
    for o in insts {
        let data = o.data();
        let beta = o.initial().iter().map(|c| c.1).fold(0.0, f64::max);
        let area: f64 = o.initial().iter().map(|c| c.0).sum();
        for t in TIMES {
            let a = AreaBoundReport::compute(&data, t).unwrap();
            let from_k = a.from_k.unwrap();
            let tg = tg_pointwise_area(beta, area, o.n, t).unwrap();
            ok &= le(a.exact, a.jensen_h) && le(a.jensen_h, from_k) && le(a.exact, tg);
            agree = agree.max(rel(a.jensen_h, o.jensen_h(t)));
            binomial = binomial.max(rel(a.binomial_terms.iter().sum(), a.exact));
            let v = VolumeBoundReport::compute(&data, t).unwrap();
            ok &= le(v.exact, v.jensen_h)
                && le(v.jensen_h, v.from_k.unwrap())
                && le(v.exact, v.tg_pointwise.unwrap());
            binomial = binomial.max(rel(v.binomial_terms.iter().sum(), v.exact));
        }
    }
    (
        ok && binomial <= 1e-12 && agree <= 1e-12,
        format!("chain holds {ok}, binomial deviation {binomial:.3e}, Jensen oracle agreement {agree:.3e}"),
    )
}

fn criterion_4(insts: &[Oracle]) -> (bool, String) {
    let mut volume: f64 = 0.0;
    for n in 2..=5u32 {
        for beta in [0.2, 1.0, 3.0, 7.5] {
            let nf = f64::from(n);
            let model = ModelGeometry::new(n, beta).unwrap();
            let history = AreaHistory::model(model, 1.0, 6.0).unwrap();
            let quadrature =
                AreaHistory::integrand(6.0, move |s| (1.0 + beta * s / nf).powi(n as i32)).unwrap();
            for t in [0.1, 1.0, 3.0, 6.0] {
                let closed =
                    nf / (beta * (nf + 1.0)) * ((1.0 + beta * t / nf).powi(n as i32 + 1) - 1.0);
                volume = volume
                    .max(rel(history.omega_volume(t).unwrap(), closed))
                    .max(rel(quadrature.omega_volume(t).unwrap(), closed));
            }
        }
    }
    let mut derivative: f64 = 0.0;
    for o in insts {
        let data = o.data();
        for t in TIMES {
            let h = 1e-4 * t;
            let fd = (volume_bound_exact(&data, t + h).unwrap()
                - volume_bound_exact(&data, t - h).unwrap())
                / (2.0 * h);
            derivative = derivative.max(rel(fd, area_bound_exact(&data, t).unwrap()));
        }
    }
    (
        volume <= 1e-9 && derivative <= 1e-6,
        format!("volume deviation {volume:.3e}, derivative deviation {derivative:.3e}"),
    )
}

fn criterion_5() -> (bool, String) {
    type Exact = fn(f64) -> f64;
    let smooth: Vec<(AreaHistory, Exact)> = vec![
        (
            AreaHistory::integrand(4.0, |t| (1.0 + t).powi(2)).unwrap(),
            |t| (1.0 + t).powi(2),
        ),
        (
            AreaHistory::integrand(4.0, |t| (1.0 + t / 2.0).powi(4)).unwrap(),
            |t| (1.0 + t / 2.0).powi(4),
        ),
        (AreaHistory::constant(0.7, 4.0).unwrap(), |_| 0.7),
    ];
    let mut worst: f64 = 0.0;
    for (history, exact) in &smooth {
        for t in [0.5, 1.0, 3.0] {
            let est = generalized_area(history, t, Schedule::default_for(t)).unwrap();
            worst = worst.max((est.estimate - exact(t)).abs());
        }
    }
    // area 3 before t = 1, area 1 from t = 1 on
    let jump = AreaHistory::exact(
        2.0,
        |t| if t < 1.0 { 3.0 } else { 1.0 },
        |t| 3.0 * t.min(1.0) + (t - 1.0).max(0.0),
    )
    .unwrap();
    let est = generalized_area(&jump, 1.0, Schedule::default_for(1.0)).unwrap();
    let s_t = jump.area_at(1.0).unwrap();
    let left = left_limsup(&jump, &est).unwrap();
    let jump_ok =
        s_t < est.estimate && (est.estimate - 3.0).abs() <= 1e-6 && (left - 3.0).abs() <= 1e-6;
    (
        worst <= 1e-4 && jump_ok,
        format!(
            "smooth deviation {worst:.3e}; jump s_T {s_t} < estimate {:.9} ~ left limit {left}",
            est.estimate
        ),
    )
}

/// `|S_3|` at `p = 1, n = 3` as an exact fraction.
fn p1_area(j: u128) -> f64 {
    let d = 2 * j - 1;
    let num = (j + 1).pow(3) * d * d + (3 * j - 1).pow(3);
    let den = 2 * j * d * d;
    (num / den) as f64 + (num % den) as f64 / den as f64
}

fn criterion_6() -> (bool, String) {
    let mut norm: f64 = 0.0;
    for j in [1, 10, 100, 10_000] {
        for p in [1.0, 1.5, 2.0] {
            norm = norm.max(
                (CounterexampleInstance::build(j, p, 3)
                    .unwrap()
                    .lp_norm()
                    .unwrap()
                    - 1.0)
                    .abs(),
            );
        }
    }
    let ratio = divergence_report(1.0, 3, 3.0, &[100]).unwrap().rows[0].ratio;
    let closed = p1_area(100) / 8.0;
    let slope = divergence_report(1.0, 3, 3.0, &[100, 1000, 10_000])
        .unwrap()
        .growth_slope
        .unwrap();
    (
        norm <= 1e-12 && rel(ratio, closed) <= 0.01 && rel(ratio, 644.0) <= 0.01 && rel(slope, 2.0) <= 0.05,
        format!("norm deviation {norm:.3e}, ratio {ratio:.3} (closed form {closed:.3}), slope {slope:.4}"),
    )
}

fn criterion_7() -> (bool, String) {
    let traj = integrate_raychaudhuri(-3.0, &RicciProfile::Zero, 3, 2.0, 1e-3).unwrap();
    let focal = traj.focal_time.unwrap_or(f64::NAN);
    ((focal - 1.0).abs() <= 1e-6, format!("focal time {focal}"))
}

fn criterion_8(insts: &[Oracle]) -> (bool, String) {
    let grid: Vec<f64> = (0..=250).map(|i| 0.02 * f64::from(i)).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut verdicts = true;
    for o in insts {
        let nf = f64::from(o.n);
        let beta = o.initial().iter().map(|c| c.1).fold(0.0, f64::max);
        let areas: Vec<f64> = grid.iter().map(|&t| o.area(t, None)).collect();
        let q: Vec<f64> = grid
            .iter()
            .zip(&areas)
            .map(|(&t, &a)| a / (beta * t / nf + 1.0).powi(o.n as i32))
            .collect();
        worst = q
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0])
            .fold(worst, f64::max);
        verdicts &= monotone_quotient_check(&grid, &areas, beta, o.n)
            .unwrap()
            .non_increasing;
    }
    (
        worst <= 1e-9 && verdicts,
        format!("max relative increase {worst:.3e}, library verdicts agree {verdicts}"),
    )
}

fn criterion_9(insts: &[Oracle]) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for o in insts {
        let whole = o.data();
        let parts: Vec<InitialDataSet> = (0..3)
            .map(|p| {
                let ids: Vec<String> = (0..o.cells.len())
                    .filter(|&i| o.cells[i].3 == p)
                    .map(|i| format!("x{i}"))
                    .collect();
                whole.restrict_ids(&ids)
            })
            .collect();
        let st = o.spacetime();
        for t in TIMES {
            let sum = |f: &dyn Fn(&InitialDataSet) -> f64| parts.iter().map(f).sum::<f64>();
            worst = worst
                .max(rel(
                    sum(&|d| area_bound_exact(d, t).unwrap()),
                    area_bound_exact(&whole, t).unwrap(),
                ))
                .max(rel(
                    sum(&|d| volume_bound_exact(d, t).unwrap()),
                    volume_bound_exact(&whole, t).unwrap(),
                ))
                .max(rel(
                    sum(&|d| area_bound_jensen(d, t, true).unwrap()),
                    area_bound_jensen(&whole, t, true).unwrap(),
                ));
            let evolved: f64 = (0..3)
                .map(|p| {
                    let ids: Vec<String> = parts[p].cells.iter().map(|c| c.id.clone()).collect();
                    st.evolve_areas(|c| ids.contains(&c.id), t).unwrap()
                })
                .sum();
            worst = worst.max(rel(evolved, st.total_area(t).unwrap()));
            worst = worst.max(rel(
                (0..3).map(|p| o.area(t, Some(p))).sum(),
                o.area(t, None),
            ));
            worst = worst.max(rel(
                (0..3).map(|p| o.exact_bound(t, Some(p))).sum(),
                o.exact_bound(t, None),
            ));
        }
    }
    (
        worst <= 1e-12,
        format!("max relative deviation {worst:.3e}"),
    )
}

#[test]
fn acceptance_criteria() {
    let insts = oracles();
    let results = [
        ("model regression", criterion_1()),
        ("area bound on random instances", criterion_2(&insts)),
        ("ordering chain", criterion_3(&insts)),
        ("coarea consistency", criterion_4(&insts)),
        ("generalized area sandwich", criterion_5()),
        ("counterexample reproduction", criterion_6()),
        ("focal time", criterion_7()),
        ("monotone quotient", criterion_8(&insts)),
        ("partition additivity", criterion_9(&insts)),
    ];
    for (i, (name, (passed, detail))) in results.iter().enumerate() {
        println!(
            "{} criterion {} ({name}): {detail}",
            if *passed { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.1 .0).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}

#[test]
fn library_suite_agrees() {
    for outcome in run_all(&VerifyConfig::default()).unwrap() {
        println!("{}", outcome.line());
        assert!(outcome.passed, "{}", outcome.line());
    }
}
