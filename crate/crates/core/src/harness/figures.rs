//! Prepackaged scenario sets for the standard comparison figures.
//!
//! Every set keeps `p` and `N` fixed across frameworks so all curves share
//! one spectral efficiency.

use crate::baselines::OfdmImConfig;
use crate::channel::JammingPattern;
use crate::error::{Error, Result};
use crate::harness::output::fmt_g9;
use crate::harness::scenario::{Detector, Framework, Order, Scenario};

pub const FIGURE_NAMES: [&str; 7] = ["fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6", "fig7"];

/// Trial cap used by the figure sets.
pub const FIGURE_MAX_TRIALS: u64 = 2000;

const JAMMED_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn snr_grid() -> impl Iterator<Item = f64> + Clone {
    (0..=8).map(|i| 5.0 * i as f64)
}

fn sjr_grid() -> impl Iterator<Item = f64> + Clone {
    (-6..=6).map(|i| 5.0 * i as f64)
}

/// What varies along a curve.
#[derive(Clone, Copy)]
enum Axis {
    Snr(f64),
    Sjr(f64),
    Rho(f64),
}

impl Axis {
    fn tag(self) -> String {
        match self {
            Axis::Snr(v) => format!("snr{}", fmt_g9(v)),
            Axis::Sjr(v) => format!("sjr{}", fmt_g9(v)),
            Axis::Rho(v) => format!("rho{}", fmt_g9(v)),
        }
    }
}

/// One curve of a figure: a framework with its order and options.
#[derive(Clone, Copy)]
struct Curve {
    framework: Framework,
    order: Order,
    detector: Option<Detector>,
    n_a: Option<usize>,
    t_e: Option<usize>,
}

impl Curve {
    fn aj(m: usize) -> Self {
        Self::aj_with(m, Detector::Lowcomp)
    }

    fn aj_with(m: usize, detector: Detector) -> Self {
        Self {
            framework: Framework::AjOfdm,
            order: Order::Fixed(m),
            detector: Some(detector),
            n_a: None,
            t_e: None,
        }
    }

    fn qam(m: usize) -> Self {
        Self {
            framework: Framework::QamOfdm,
            order: Order::Fixed(m),
            detector: None,
            n_a: None,
            t_e: None,
        }
    }

    fn im(cfg: &OfdmImConfig) -> Self {
        Self {
            framework: Framework::OfdmIm,
            order: Order::Fixed(cfg.m),
            detector: None,
            n_a: Some(cfg.n_a),
            t_e: None,
        }
    }

    fn adapt(t_e: usize) -> Self {
        Self {
            framework: Framework::AjOfdmAdapt,
            order: Order::Auto,
            detector: None,
            n_a: None,
            t_e: Some(t_e),
        }
    }

    fn tag(&self) -> String {
        let fw = match self.framework {
            Framework::AjOfdm => "aj",
            Framework::AjOfdmAdapt => "adapt",
            Framework::QamOfdm => "qam",
            Framework::OfdmIm => "im",
        };
        let mut tag = format!("{fw}_m{}", self.order);
        if let Some(d) = self.detector.filter(|d| *d != Detector::Lowcomp) {
            tag.push_str(&format!("_{d:?}").to_lowercase());
        }
        if let Some(a) = self.n_a {
            tag.push_str(&format!("_na{a}"));
        }
        if let Some(t) = self.t_e {
            tag.push_str(&format!("_te{t}"));
        }
        tag
    }
}

struct Setup {
    figure: &'static str,
    p: usize,
    n: usize,
    pattern: JammingPattern,
    rho: f64,
    snr_db: f64,
    sjr_db: f64,
}

impl Setup {
    fn new(figure: &'static str, pattern: JammingPattern, rho: f64) -> Self {
        Self {
            figure,
            p: 4,
            n: 4,
            pattern,
            rho,
            snr_db: 20.0,
            sjr_db: -20.0,
        }
    }

    fn scenario(&self, curve: &Curve, axis: Axis) -> Scenario {
        let (mut rho, mut snr, mut sjr) = (self.rho, self.snr_db, self.sjr_db);
        match axis {
            Axis::Snr(v) => snr = v,
            Axis::Sjr(v) => sjr = v,
            Axis::Rho(v) => rho = v,
        }
        let id = format!("{}_{}_{}", self.figure, curve.tag(), axis.tag());
        let mut s = Scenario::new(id, curve.framework, curve.order, self.pattern, rho, snr, sjr);
        s.p = self.p;
        s.n = self.n;
        s.detector = curve.detector;
        s.n_a = curve.n_a;
        s.t_e = curve.t_e;
        s.max_trials = FIGURE_MAX_TRIALS;
        s
    }

    fn sweep(&self, curves: &[Curve], axes: impl Iterator<Item = Axis> + Clone) -> Vec<Scenario> {
        curves
            .iter()
            .flat_map(|c| axes.clone().map(move |a| self.scenario(c, a)))
            .collect()
    }
}

fn index_modulation(p: usize, n: usize) -> Vec<Curve> {
    OfdmImConfig::all_for(p, n).iter().map(Curve::im).collect()
}

fn comparison_curves() -> Vec<Curve> {
    let mut curves: Vec<Curve> = [2, 4, 16].into_iter().map(Curve::aj).collect();
    curves.extend([2, 4, 16].into_iter().map(Curve::qam));
    curves.extend(index_modulation(4, 4));
    curves
}

fn adaptive_curves() -> Vec<Curve> {
    let mut curves = vec![Curve::aj(4), Curve::adapt(28), Curve::adapt(14), Curve::qam(2)];
    curves.extend(index_modulation(4, 4));
    curves
}

/// Scenario set of figure `name`; see [`FIGURE_NAMES`].
pub fn figure_scenarios(name: &str) -> Result<Vec<Scenario>> {
    let pb = JammingPattern::PartialBand;
    let random = JammingPattern::Random;
    let rhos = || JAMMED_FRACTIONS.into_iter().map(Axis::Rho);
    let scenarios = match name {
        "fig3" => Setup::new("fig3", pb, 0.5).sweep(
            &[Curve::aj_with(4, Detector::Full), Curve::aj(4)],
            snr_grid().map(Axis::Snr),
        ),
        "fig4a" => Setup::new("fig4a", pb, 0.5).sweep(&comparison_curves(), snr_grid().map(Axis::Snr)),
        "fig4b" => Setup::new("fig4b", pb, 0.5).sweep(&comparison_curves(), sjr_grid().map(Axis::Sjr)),
        "fig5a" => {
            let mut curves: Vec<Curve> = [2, 4, 16].into_iter().map(Curve::aj).collect();
            curves.push(Curve::qam(2));
            curves.extend(index_modulation(4, 4));
            Setup::new("fig5a", pb, 0.5).sweep(&curves, rhos())
        }
        "fig5b" => {
            let mut setup = Setup::new("fig5b", pb, 0.5);
            setup.p = 6;
            setup.n = 6;
            let mut curves: Vec<Curve> = [2, 4, 8, 64].into_iter().map(Curve::aj).collect();
            curves.push(Curve::qam(2));
            setup.sweep(&curves, rhos())
        }
        "fig6" => Setup::new("fig6", random, 0.25).sweep(&adaptive_curves(), rhos()),
        "fig7" => Setup::new("fig7", random, 0.25).sweep(&adaptive_curves(), sjr_grid().map(Axis::Sjr)),
        other => {
            return Err(Error::Scenario(format!(
                "unknown figure '{other}'; expected one of {}",
                FIGURE_NAMES.join(", ")
            )))
        }
    };
    for s in &scenarios {
        s.validate()?;
    }
    Ok(scenarios)
}
