//! The three verification suites. Each suite is a fixed list of named
//! checks; the config may run any subset of it.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use mellin_core::catalog::PairSpec;
use mellin_core::constructions::{
    build_v_l_h, build_w, fiber_vl, regularizer_symbol_f, symbol_binomial_inverse_r, symbol_binomial_r,
    symbol_g_y, symbol_h, symbol_shift_r, BinomialData, ReciprocalOptions, SeriesReport,
};
use mellin_core::fredholm::{disk_check_f, disk_check_g, homotopy_scan, BoundaryLoop, ScanOptions, ScanReport};
use mellin_core::grid::{mellin_forward, mellin_inverse, Grid, GridFunction};
use mellin_core::io::{read_operator_bin, write_operator_bin, SymbolCache};
use mellin_core::operators::{
    band_singular_values, cauchy_sio_direct, combination, compactness_proxy, conv_operator, defect, difference,
    interior_probes, pdo_operator, product, CompactnessReport, Identity, LinearOperator, OpRef, ProbeSet,
    ProxyConfig,
};
use mellin_core::shifts::{shift_operator, NeumannInverse, WeightedShift};
use mellin_core::symbols::{
    make_p_y, make_r_y, make_s_y, p_minus, p_plus, r_y, s_y, symbol_algebra, AlgebraOp, BivariateSymbol, Sign,
};
use mellin_core::{Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::report::{CheckRecord, PlotSeries, Relation, SuiteReport, Timing};
use crate::CliError;

const ONE: C64 = C64::new(1.0, 0.0);

pub const IDENTITIES: &[&str] = &[
    "mellin_gaussian",
    "mellin_round_trip",
    "symbol_identities",
    "projection_cross",
    "projection_square",
    "conv_vs_pv",
];

pub const PDO: &[&str] = &[
    "shift_realization",
    "binomial_realization",
    "neumann_vs_series",
    "series_tail_honest",
    "root_test",
    "semicommutator",
];

pub const INDEX: &[&str] = &[
    "disk_f",
    "disk_g",
    "ellipticity",
    "index_zero",
    "identity_at_zero",
    "regularizer_residual",
    "fiber_factorization",
    "chain_compact",
    "g2w_minus_r2",
    "violating_rejected",
];

pub fn definition(suite: &str) -> Option<&'static [&'static str]> {
    match suite {
        "identities" => Some(IDENTITIES),
        "pdo" => Some(PDO),
        "index" => Some(INDEX),
        _ => None,
    }
}

/// Everything a suite needs: config, grid, probes and the output directory.
pub struct Context {
    pub config: Config,
    pub grid: Arc<Grid>,
    pub probes: ProbeSet,
    pub out: PathBuf,
}

impl Context {
    pub fn new(config: Config, grid_n: Option<usize>, seed: Option<u64>, out: &Path) -> std::result::Result<Self, CliError> {
        let mut config = config;
        if let Some(seed) = seed {
            config.seed = seed;
        }
        let grid = Grid::new(config.grid_spec(grid_n)?).map_err(|e| CliError::Config(e.to_string()))?;
        let probes = interior_probes(&grid, config.seed);
        Ok(Self {
            config,
            grid,
            probes,
            out: out.to_path_buf(),
        })
    }

    fn pairs(&self) -> &[PairSpec] {
        &self.config.catalog.pairs
    }

    fn binomials(&self, pair: &PairSpec, y: f64, mu: f64) -> Result<(BinomialData, BinomialData)> {
        pair.binomials(y, mu, self.grid.p(), self.config.catalog.sampling)
    }

    fn proxy(&self) -> ProxyConfig {
        ProxyConfig {
            seed: self.config.seed,
            ..ProxyConfig::default()
        }
    }

    fn conv(&self, y: f64, which: Option<Sign>) -> Result<OpRef> {
        let m = match which {
            Some(sign) => make_p_y(&self.grid, y, sign)?,
            None => make_r_y(&self.grid, y)?,
        };
        Ok(Arc::new(conv_operator(&m, &self.grid)?))
    }

    fn pdo(&self, a: &BivariateSymbol) -> Result<OpRef> {
        Ok(Arc::new(pdo_operator(a, &self.grid)?))
    }
}

struct Runner {
    suite: &'static str,
    selected: Vec<String>,
    checks: Vec<CheckRecord>,
    seconds: BTreeMap<String, f64>,
    plots: Vec<PlotSeries>,
}

impl Runner {
    fn new(suite: &'static str, config: &Config) -> std::result::Result<Self, CliError> {
        let all = definition(suite).expect("known suite");
        let list = match suite {
            "identities" => &config.suites.identities,
            "pdo" => &config.suites.pdo,
            _ => &config.suites.index,
        };
        let selected: Vec<String> = match list {
            Some(names) => names.clone(),
            None => all.iter().map(|s| s.to_string()).collect(),
        };
        for (k, name) in selected.iter().enumerate() {
            if !all.contains(&name.as_str()) {
                return Err(CliError::Config(format!("suite {suite} has no check named {name}")));
            }
            if selected[..k].contains(name) {
                return Err(CliError::Config(format!("check {name} listed twice in suite {suite}")));
            }
        }
        Ok(Self {
            suite,
            selected,
            checks: Vec::new(),
            seconds: BTreeMap::new(),
            plots: Vec::new(),
        })
    }

    /// Runs `f` if the check is selected. `f` returns the measured value and
    /// a note; an error fails the check and becomes the note.
    fn check(
        &mut self,
        name: &str,
        relation: Relation,
        threshold: f64,
        f: impl FnOnce(&mut Vec<PlotSeries>) -> Result<(f64, String)>,
    ) {
        if !self.selected.iter().any(|s| s == name) {
            return;
        }
        let started = Instant::now();
        let (value, note) = match f(&mut self.plots) {
            Ok((v, note)) => (Some(v), note),
            Err(e) => (None, format!("error: {e}")),
        };
        self.seconds.insert(name.to_string(), started.elapsed().as_secs_f64());
        let pass = value.is_some_and(|v| relation.holds(v, threshold));
        self.checks.push(CheckRecord {
            name: name.to_string(),
            value: value.filter(|v| v.is_finite()),
            threshold,
            relation,
            pass,
            note,
        });
    }

    fn finish(mut self, ctx: &Context) -> (SuiteReport, Timing) {
        let order = |name: &str| self.selected.iter().position(|s| s == name);
        self.checks.sort_by_key(|c| order(&c.name));
        let fixtures = ctx.pairs().iter().map(|p| p.name.clone()).collect();
        let report = SuiteReport {
            suite: self.suite.to_string(),
            fixtures,
            grid_hash: ctx.grid.spec().hash(),
            seed: ctx.config.seed,
            pass: self.checks.iter().all(|c| c.pass),
            checks: self.checks,
            plots: self.plots,
        };
        let timing = Timing {
            suite: self.suite.to_string(),
            seconds: self.seconds,
        };
        (report, timing)
    }
}

fn max_rel(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// `max(σ_{n/8}/σ_1 / σ-threshold, edge / edge-threshold)`; at most 1 iff
/// the operator is compact-like.
fn proxy_score(c: &CompactnessReport, cfg: &ProxyConfig) -> (f64, String) {
    let sigma = c.sigma_at_eighth().upper;
    let score = (sigma / cfg.sigma_threshold).max(c.max_edge_response / cfg.edge_threshold);
    let note = format!(
        "{:?}: sigma_n/8 ratio {sigma:.3e}, edge response {:.3e}",
        c.verdict, c.max_edge_response
    );
    (score, note)
}

fn singular_series(name: &str, op: &dyn LinearOperator) -> Result<PlotSeries> {
    let sv = band_singular_values(op)?;
    let top = sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let mut s = PlotSeries::new(name, &["k", "sigma", "sigma_over_sigma1"]);
    for (k, v) in sv.iter().enumerate() {
        s.push(vec![(k + 1) as f64, *v, v / top]);
    }
    Ok(s)
}

pub fn identities(ctx: &Context) -> std::result::Result<(SuiteReport, Timing), CliError> {
    let mut run = Runner::new("identities", &ctx.config)?;
    let grid = &ctx.grid;
    run.check("mellin_gaussian", Relation::AtMost, 1e-6, |_| {
        let f = GridFunction::from_log_fn(Arc::clone(grid), |u| C64::new((-u * u).exp(), 0.0))?;
        let closed: Vec<C64> = grid.x().iter().map(|&x| C64::new(PI.sqrt() * (-x * x / 4.0).exp(), 0.0)).collect();
        Ok((max_rel(mellin_forward(&f).values(), &closed), "relative sup error against sqrt(pi) e^{-x^2/4}".into()))
    });
    run.check("mellin_round_trip", Relation::AtMost, 1e-6, |_| {
        let f = GridFunction::from_log_fn(Arc::clone(grid), |u| {
            C64::from_polar((-(u - 1.0).powi(2) / 2.0).exp(), 0.5 * u) + C64::new(0.0, 0.3) * (-(u + 2.0).powi(2)).exp()
        })?;
        let back = mellin_inverse(&mellin_forward(&f));
        Ok((max_rel(back.samples(), f.samples()), "relative sup error of inverse(forward(f))".into()))
    });
    run.check("symbol_identities", Relation::AtMost, 1e-12, |plots| {
        let mut worst = 0.0f64;
        for &y in &ctx.config.ys {
            for &x in grid.x() {
                let (s, r) = (s_y(x, y), r_y(x, y));
                worst = worst.max((s * s - r * r - 1.0).norm());
                worst = worst.max((p_plus(x, y) * p_minus(x, y) + r * r / 4.0).norm());
            }
        }
        let mut trace = PlotSeries::new("symbols_y2", &["x", "s_re", "s_im", "r_re", "r_im", "p_plus_re", "p_minus_re"]);
        for &x in grid.x().iter().step_by(ctx.config.plot_stride) {
            let (s, r) = (s_y(x, 2.0), r_y(x, 2.0));
            trace.push(vec![x, s.re, s.im, r.re, r.im, p_plus(x, 2.0).re, p_minus(x, 2.0).re]);
        }
        plots.push(trace);
        Ok((worst, format!("s^2 - r^2 = 1 and p+ p- = -r^2/4 for y in {:?}", ctx.config.ys)))
    });
    let quarter = C64::new(0.25, 0.0);
    run.check("projection_cross", Relation::AtMost, 1e-8, |_| {
        let mut worst = 0.0f64;
        for &y in &ctx.config.ys {
            let r = ctx.conv(y, None)?;
            let r2 = product(vec![Arc::clone(&r), r])?;
            let cross = product(vec![ctx.conv(y, Some(Sign::Plus))?, ctx.conv(y, Some(Sign::Minus))?])?;
            let expect = combination(vec![(-quarter, r2)])?;
            worst = worst.max(defect(cross.as_ref(), expect.as_ref(), &ctx.probes));
        }
        Ok((worst, "P+ P- vs -R^2/4 on interior probes".into()))
    });
    run.check("projection_square", Relation::AtMost, 1e-8, |_| {
        let mut worst = 0.0f64;
        for &y in &ctx.config.ys {
            let r = ctx.conv(y, None)?;
            let r2 = product(vec![Arc::clone(&r), r])?;
            for sign in [Sign::Plus, Sign::Minus] {
                let p = ctx.conv(y, Some(sign))?;
                let square = product(vec![Arc::clone(&p), Arc::clone(&p)])?;
                let expect = combination(vec![(ONE, p), (quarter, Arc::clone(&r2))])?;
                worst = worst.max(defect(square.as_ref(), expect.as_ref(), &ctx.probes));
            }
        }
        Ok((worst, "(P+-)^2 vs P+- + R^2/4 on interior probes".into()))
    });
    run.check("conv_vs_pv", Relation::AtMost, 1e-3, |_| {
        let path = ctx.out.join("cache").join(format!("pv_s2_{}.bin", grid.spec().hash()));
        let direct = match read_operator_bin(&path, grid) {
            Ok(op) => op,
            Err(_) => {
                let op = cauchy_sio_direct(grid, 2.0)?;
                write_operator_bin(&path, &op)?;
                op
            }
        };
        let band = conv_operator(&make_s_y(grid, 2.0)?, grid)?;
        let d = defect(&direct, &band, &ctx.probes);
        Ok((d, "PV quadrature vs Co(s_2) on interior probes".into()))
    });
    Ok(run.finish(ctx))
}

struct SeriesRoute {
    label: String,
    data: BinomialData,
    symbol: BivariateSymbol,
    report: SeriesReport,
}

fn series_routes(ctx: &Context) -> Result<Vec<SeriesRoute>> {
    let mut out = Vec::new();
    for pair in ctx.pairs() {
        let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
        for (side, d) in [("c", dc), ("d", dd)] {
            let (symbol, report) = symbol_binomial_inverse_r(&d, &ctx.grid, ctx.config.tol)?;
            out.push(SeriesRoute {
                label: format!("{}:{side}", pair.name),
                data: d,
                symbol,
                report,
            });
        }
    }
    Ok(out)
}

fn cached<'a, T>(cell: &'a OnceCell<std::result::Result<T, String>>, f: impl FnOnce() -> Result<T>) -> Result<&'a T> {
    cell.get_or_init(|| f().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Numerical(e.clone()))
}

pub fn pdo(ctx: &Context) -> std::result::Result<(SuiteReport, Timing), CliError> {
    let mut run = Runner::new("pdo", &ctx.config)?;
    let grid = &ctx.grid;
    let routes = OnceCell::new();
    run.check("shift_realization", Relation::AtMost, 1e-6, |_| {
        let mut worst = 0.0f64;
        for route in cached(&routes, || series_routes(ctx))? {
            let d = &route.data;
            let ur = product(vec![Arc::new(shift_operator(&d.gamma, grid)?), ctx.conv(d.y, None)?])?;
            let op_d = ctx.pdo(&symbol_shift_r(&d.gamma, d.y, grid, d.sampling)?)?;
            worst = worst.max(defect(ur.as_ref(), op_d.as_ref(), &ctx.probes));
        }
        Ok((worst, "U_gamma R_2 vs Op(d) on interior probes".into()))
    });
    run.check("binomial_realization", Relation::AtMost, 1e-6, |_| {
        let mut worst = 0.0f64;
        for route in cached(&routes, || series_routes(ctx))? {
            let d = &route.data;
            let w: OpRef = Arc::new(WeightedShift::new(&d.coefficient(), &d.gamma, grid)?);
            let a = combination(vec![(ONE, Identity::new(grid)), (-ONE, w)])?;
            let ar = product(vec![a, ctx.conv(d.y, None)?])?;
            let op_a = ctx.pdo(&symbol_binomial_r(d, grid)?)?;
            worst = worst.max(defect(ar.as_ref(), op_a.as_ref(), &ctx.probes));
        }
        Ok((worst, "(I - vU) R_2 vs Op(a) on interior probes".into()))
    });
    run.check("neumann_vs_series", Relation::AtMost, 1e-6, |_| {
        let mut worst = 0.0f64;
        for route in cached(&routes, || series_routes(ctx))? {
            let d = &route.data;
            let inv: OpRef = Arc::new(NeumannInverse::new(&d.coefficient(), &d.gamma, grid, ctx.config.tol)?);
            let nr = product(vec![inv, ctx.conv(d.y, None)?])?;
            worst = worst.max(defect(nr.as_ref(), ctx.pdo(&route.symbol)?.as_ref(), &ctx.probes));
        }
        Ok((worst, "Neumann route vs series symbol on interior probes".into()))
    });
    run.check("series_tail_honest", Relation::AtMost, 0.0, |_| {
        let routes = cached(&routes, || series_routes(ctx))?;
        let dishonest: Vec<&str> = routes
            .iter()
            .filter(|r| !(r.report.honest && r.report.fiber_sum_error <= r.report.fiber_sum_bound))
            .map(|r| r.label.as_str())
            .collect();
        let terms = routes.iter().map(|r| r.report.terms_max).max().unwrap_or(0);
        Ok((dishonest.len() as f64, format!("symbols whose tail bound undershoots: {dishonest:?}; at most {terms} terms")))
    });
    run.check("root_test", Relation::Below, 0.95, |plots| {
        let routes = cached(&routes, || series_routes(ctx))?;
        let mut series = PlotSeries::new("root_test", &["route", "n", "root"]);
        for (k, r) in routes.iter().enumerate() {
            for (n, v) in r.report.root_test.iter().enumerate() {
                series.push(vec![k as f64, (n + 1) as f64, *v]);
            }
        }
        plots.push(series);
        let worst = routes.iter().map(|r| r.report.root_limit).fold(0.0, f64::max);
        let labels: Vec<&str> = routes.iter().map(|r| r.label.as_str()).collect();
        Ok((worst, format!("max over n >= 10 of |a_n|^(1/n) for routes {labels:?}")))
    });
    run.check("semicommutator", Relation::AtMost, 1.0, |plots| {
        let pair = ctx.config.catalog.primary();
        let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
        let a = symbol_binomial_r(&dc, grid)?;
        let b = symbol_shift_r(&dd.gamma, 2.0, grid, dd.sampling)?;
        let ab = symbol_algebra(&a, &b, AlgebraOp::Mul)?;
        let lhs = product(vec![ctx.pdo(&a)?, ctx.pdo(&b)?])?;
        let rest = difference(&lhs, &ctx.pdo(&ab)?)?;
        plots.push(singular_series("semicommutator_sv", rest.as_ref())?);
        let (score, note) = proxy_score(&compactness_proxy(rest.as_ref(), &ctx.proxy())?, &ctx.proxy());
        Ok((score, format!("Op(a)Op(d) - Op(ad) for {}: {note}", pair.name)))
    });
    Ok(run.finish(ctx))
}

fn scans(ctx: &Context) -> Result<Vec<ScanReport>> {
    let options = ScanOptions {
        seed: ctx.config.seed,
        tol: ctx.config.tol,
        ..ScanOptions::default()
    };
    ctx.pairs()
        .iter()
        .map(|pair| {
            let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
            homotopy_scan(&dc, &dd, &ctx.grid, &options)
        })
        .collect()
}

fn disk_sweep(seed: u64, g: bool) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..8001).map(|k| -40.0 + 0.01 * k as f64).collect();
    let (mut excess, mut min_abs) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..100 {
        let mut coefficient = || C64::from_polar(rng.random_range(0.0..0.99), rng.random_range(-PI..PI));
        let (v, w) = (coefficient(), coefficient());
        let (psi, zeta) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let r = if g { disk_check_g(v, w, psi, zeta, &x)? } else { disk_check_f(v, w, psi, zeta, &x) };
        excess = excess.max(r.max_distance - r.radius);
        min_abs = min_abs.min(r.min_abs);
    }
    Ok((excess, min_abs))
}

pub fn index(ctx: &Context) -> std::result::Result<(SuiteReport, Timing), CliError> {
    let mut run = Runner::new("index", &ctx.config)?;
    let grid = &ctx.grid;
    let seed = ctx.config.seed;
    let tol = ctx.config.tol;
    let reports = OnceCell::new();
    run.check("disk_f", Relation::AtMost, 1e-12, |_| {
        let (excess, _) = disk_sweep(seed, false)?;
        Ok((excess, "max distance beyond radius over 100 random (v, w, psi, zeta)".into()))
    });
    run.check("disk_g", Relation::AtMost, 1e-12, |_| {
        let (excess, min_abs) = disk_sweep(seed, true)?;
        if min_abs <= 0.0 {
            return Err(Error::Numerical("g vanishes on the sweep".into()));
        }
        Ok((excess, format!("max distance beyond radius; min |g| = {min_abs:.3}")))
    });
    run.check("ellipticity", Relation::Above, 1e-3, |plots| {
        let reports = cached(&reports, || scans(ctx))?;
        let mut curve = PlotSeries::new(
            "mu_scan",
            &["pair", "mu", "min_abs_h", "residual", "identity_defect", "op_norm", "fiber_magnitude"],
        );
        for (k, rep) in reports.iter().enumerate() {
            for row in &rep.rows {
                curve.push(vec![
                    k as f64,
                    row.mu,
                    row.ellipticity.min_abs,
                    row.residual,
                    row.identity_defect,
                    row.op_norm,
                    row.fiber_magnitude,
                ]);
            }
        }
        plots.push(curve);
        let worst = reports
            .iter()
            .flat_map(|r| r.rows.iter().map(|row| row.ellipticity.min_abs))
            .fold(f64::INFINITY, f64::min);
        Ok((worst, "min |h_mu,2| over boundary and fiber rows, all scanned mu".into()))
    });
    run.check("index_zero", Relation::AtMost, 0.0, |_| {
        let reports = cached(&reports, || scans(ctx))?;
        let worst = reports
            .iter()
            .flat_map(|r| r.rows.iter().flat_map(|row| row.windings.iter().map(|w| w.unsigned_abs())))
            .max()
            .unwrap_or(0);
        let verdict = if worst == 0 { "INDEX ZERO" } else { "NONZERO WINDING" };
        Ok((worst as f64, format!("{verdict}: max |winding| over loops and mu; {}", reports[0].note)))
    });
    run.check("identity_at_zero", Relation::AtMost, 1e-8, |_| {
        let reports = cached(&reports, || scans(ctx))?;
        let worst = reports.iter().map(|r| r.rows[0].identity_defect).fold(0.0, f64::max);
        Ok((worst, "V_0,2 - I on interior probes".into()))
    });
    run.check("regularizer_residual", Relation::AtMost, 1e-2, |_| {
        let reports = cached(&reports, || scans(ctx))?;
        let worst = reports
            .iter()
            .flat_map(|r| r.rows.iter().map(|row| row.residual))
            .fold(0.0, f64::max);
        let lipschitz = reports.iter().all(|r| r.rows.iter().all(|row| row.lipschitz_ok));
        Ok((worst, format!("V L Op(1/h) - I on interior probes; norm Lipschitz in mu: {lipschitz}")))
    });
    run.check("fiber_factorization", Relation::AtMost, 1e-10, |plots| {
        let mut worst = 0.0f64;
        for (k, pair) in ctx.pairs().iter().enumerate() {
            let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
            let build = || Ok(symbol_h(&dc, &dd, grid, tol)?.symbol);
            let h = if k == 0 {
                let descriptor = serde_json::to_string(&(pair, tol, &ctx.config.catalog.sampling))?;
                let cache = SymbolCache::new(ctx.out.join("cache"));
                let h = cache.get_or_build(grid, &format!("h_1_2:{descriptor}"), build)?;
                let l = BoundaryLoop::from_symbol(&h, 0)?;
                let mut series = PlotSeries::new("boundary_loop_h", &["k", "re", "im"]);
                for (j, z) in l.points.iter().enumerate() {
                    series.push(vec![j as f64, z.re, z.im]);
                }
                plots.push(series);
                h
            } else {
                build()?
            };
            if h.boundary_minus().iter().chain(h.boundary_plus()).any(|&z| z != ONE) {
                return Err(Error::Numerical(format!("{}: boundary rows of h differ from 1", pair.name)));
            }
            for row in h.fibers() {
                let (v, l) = fiber_vl(&dc, &dd, &row.point, grid.x())?;
                for (j, z) in row.values.iter().enumerate() {
                    worst = worst.max((z - v[j] * l[j]).norm());
                }
            }
        }
        Ok((worst, "|h - v l| on fiber samples at mu = 1; boundary rows exactly 1".into()))
    });
    run.check("chain_compact", Relation::AtMost, 1.0, |plots| {
        let pair = ctx.config.catalog.primary();
        let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
        let chain = build_v_l_h(&dc, &dd, grid, tol)?;
        let vl = difference(&product(vec![Arc::clone(&chain.v), Arc::clone(&chain.l)])?, &chain.h)?;
        let lv = difference(&product(vec![Arc::clone(&chain.l), Arc::clone(&chain.v)])?, &chain.h)?;
        plots.push(singular_series("vl_minus_h_sv", vl.as_ref())?);
        let cfg = ctx.proxy();
        let (a, na) = proxy_score(&compactness_proxy(vl.as_ref(), &cfg)?, &cfg);
        let (b, nb) = proxy_score(&compactness_proxy(lv.as_ref(), &cfg)?, &cfg);
        Ok((a.max(b), format!("VL - H {na}; LV - H {nb}")))
    });
    run.check("g2w_minus_r2", Relation::AtMost, 1.0, |_| {
        let pair = ctx.config.catalog.primary();
        let (dc, dd) = ctx.binomials(pair, 2.0, 1.0)?;
        let (f, _) = regularizer_symbol_f(&dc, &dd, grid, tol, &ReciprocalOptions::default())?;
        let (g, _) = symbol_g_y(&dc, &dd, 2.0, &f.symbol, grid, tol)?;
        let gw = product(vec![ctx.pdo(&g)?, build_w(&dc, &dd, grid)?])?;
        let rest = difference(&gw, &ctx.conv(2.0, None)?)?;
        let cfg = ctx.proxy();
        let (score, note) = proxy_score(&compactness_proxy(rest.as_ref(), &cfg)?, &cfg);
        Ok((score, format!("Op(g_2) W - R_2 for {}: {note}", pair.name)))
    });
    run.check("violating_rejected", Relation::AtLeast, 1.0, |_| {
        let violating = &ctx.config.catalog.violating;
        let (dc, dd) = ctx.binomials(violating, 2.0, 1.0)?;
        let options = ScanOptions {
            seed,
            tol,
            ..ScanOptions::default()
        };
        match homotopy_scan(&dc, &dd, grid, &options) {
            Err(Error::Ellipticity(msg)) => Ok((1.0, format!("{}: {msg}", violating.name))),
            Err(e) => Err(e),
            Ok(_) => Ok((0.0, format!("{} passed the scan", violating.name))),
        }
    });
    Ok(run.finish(ctx))
}
